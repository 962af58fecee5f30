// Copyright 2026 The afcmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AFCMEM_ERRORS_HPP
#define AFCMEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace afcmem {

/// Invalid argument to a library operation (bad label, out-of-range probability, ...).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// The input is formally valid but the operation is undefined on it (0/0 and friends).
struct DegenerateInputError : InputError {
    using InputError::InputError;
};

/// Experiment or command configuration is inconsistent.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Not enough data to estimate the requested quantity.
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace afcmem

#endif
