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

#ifndef AFCMEM_CSV_HPP
#define AFCMEM_CSV_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace afcmem {

/// 64-bit FNV-1a digest as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view text);

const char* tool_version();

struct CsvMeta {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_hash;
};

/// "# tool=afcmem version=... command=... seed=... config_hash=..."
void write_metadata(std::ostream& os, const CsvMeta& meta);

/// Shortest round-trip text for a double, independent of the stream locale.
std::string fmt(double v);

/// One CSV row; fields are written verbatim.
void write_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace afcmem

#endif
