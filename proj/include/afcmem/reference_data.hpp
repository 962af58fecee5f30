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

#ifndef AFCMEM_REFERENCE_DATA_HPP
#define AFCMEM_REFERENCE_DATA_HPP

// Measured values of the reference experiment, used as comparison targets by
// reproduce-paper and the acceptance suite. Errors are one standard deviation.

#include <array>

#include "afcmem/polarization.hpp"

namespace afcmem::reference {

struct MeasuredRow {
    double mu, mu_err;
    double eta, eta_err;
    double p_n, p_n_err;
    double mu1, mu1_err;
    double fidelity, fidelity_err;
};

/// |D> input at four mean photon numbers.
inline constexpr std::array<MeasuredRow, 4> kFidelityVsMu = {{
    {0.8, 0.1, 0.043, 0.004, 0.0110, 0.0010, 0.25, 0.04, 0.795, 0.002},
    {1.4, 0.1, 0.036, 0.003, 0.0101, 0.0012, 0.28, 0.04, 0.855, 0.001},
    {3.6, 0.3, 0.038, 0.002, 0.0109, 0.0014, 0.29, 0.04, 0.936, 0.001},
    {8.2, 0.6, 0.037, 0.002, 0.0121, 0.0014, 0.33, 0.05, 0.957, 0.0004},
}};

/// The five temporal modes of one |D> run.
inline constexpr std::array<MeasuredRow, 5> kFidelityByMode = {{
    {1.2, 0.1, 0.035, 0.006, 0.0088, 0.0013, 0.25, 0.08, 0.849, 0.036},
    {1.5, 0.1, 0.043, 0.006, 0.0120, 0.0015, 0.28, 0.07, 0.866, 0.029},
    {1.5, 0.1, 0.032, 0.005, 0.0090, 0.0014, 0.28, 0.08, 0.864, 0.035},
    {1.5, 0.1, 0.035, 0.006, 0.0105, 0.0014, 0.30, 0.08, 0.857, 0.032},
    {1.5, 0.1, 0.026, 0.005, 0.0094, 0.0012, 0.36, 0.10, 0.833, 0.038},
}};

struct StateRow {
    Label input;
    MeasuredRow row;
};

/// Four input states at mu = 1.4.
inline constexpr std::array<StateRow, 4> kFidelityByState = {{
    {Label::H, {1.4, 0.1, 0.033, 0.003, 0.0093, 0.0013, 0.28, 0.05, 0.841, 0.002}},
    {Label::V, {1.4, 0.1, 0.037, 0.003, 0.0123, 0.0015, 0.33, 0.05, 0.840, 0.001}},
    {Label::D, {1.4, 0.1, 0.036, 0.003, 0.0101, 0.0012, 0.28, 0.04, 0.855, 0.001}},
    {Label::R, {1.4, 0.1, 0.031, 0.002, 0.0113, 0.0016, 0.36, 0.06, 0.826, 0.001}},
}};

struct TransmittedRow {
    double transmission;
    double fidelity, fidelity_err;
};

/// Unabsorbed |R> input at mu = 1.4, per temporal mode.
inline constexpr std::array<TransmittedRow, 5> kTransmittedByMode = {{
    {0.338, 0.972, 0.004},
    {0.280, 0.968, 0.005},
    {0.304, 0.974, 0.004},
    {0.301, 0.976, 0.004},
    {0.255, 0.970, 0.005},
}};

inline constexpr double kChi00 = 0.762;
inline constexpr double kAverageStateFidelity = 0.841;

}  // namespace afcmem::reference

#endif
