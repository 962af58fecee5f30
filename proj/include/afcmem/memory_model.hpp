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

#ifndef AFCMEM_MEMORY_MODEL_HPP
#define AFCMEM_MEMORY_MODEL_HPP

// Figures of merit of the spin-wave memory and the analytic single-photon-level
// fidelity model built on them. All times are in microseconds.

#include <optional>
#include <string>
#include <vector>

namespace afcmem {

/// Measured memory figures of merit. Probabilities are per input photon (eta,
/// eta_t) or per output mode window and analyzer port (p_n).
struct MemoryParams {
    double eta = 0.0385;
    double p_n = 0.0112;
    double f_c = 0.991;
    double eta_t = 0.296;
    double f_t = 0.972;
    /// Relative efficiency anisotropy between H and V.
    double eta_pol_spread = 0.09;

    /// Throws InputError when a field is outside its physical range.
    void validate() const;
};

struct StorageSchedule {
    double comb_delay = 15.0;  ///< 1/Delta
    double spin_time = 500.0;  ///< T_S, control-pulse spacing
    double mode_duration = 1.25;
    int n_modes = 5;
    double control_duration = 5.0;
    double rf_pulse_duration = 120.0;
    int rf_pulse_count = 4;
    int n_rep = 18;

    double total_storage() const { return comb_delay + spin_time; }
};

struct ScheduleReport {
    std::vector<std::string> violations;
    double total_storage = 0.0;

    bool valid() const { return violations.empty(); }
};

/// (s_max - s_min) / (s_max + s_min) for the parallel / orthogonal analyzer signals.
double visibility(double s_max, double s_min);

/// F_c = (1 + V_c) / 2.
double classical_fidelity(double v);

/// mu_1 = p_n / eta: input mean photon number that gives output SNR 1.
double mu1(const MemoryParams& params);

/// Conditional fidelity at input mean photon number mu:
/// (F_c + mu_1/mu) / (1 + 2 mu_1/mu).
double predicted_fidelity(double mu, double mu_1, double f_c);
double predicted_fidelity(double mu, const MemoryParams& params);

/// Optical-to-spin-wave conversion: absorption times control-pulse transfer.
double conversion_efficiency(double absorption_prob, double transfer_prob);

ScheduleReport validate_schedule(const StorageSchedule& s);

/// Effective rate multiplier of temporal multiplexing.
double multiplexing_gain(int n_modes);

/// Readout efficiency factor from spin dephasing. Inhomogeneous dephasing is
/// taken as fully refocused at the echo; an optional residual exponential
/// envelope exp(-T_S / t2_dd) applies when `t2_dd` is given.
double spin_decay_factor(const StorageSchedule& s, double linewidth_khz = 27.0,
                         std::optional<double> t2_dd = std::nullopt);

}  // namespace afcmem

#endif
