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

#include "afcmem/memory_model.hpp"

#include <cmath>
#include <sstream>

#include "afcmem/errors.hpp"

namespace afcmem {

namespace {

void require_probability(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) {
        std::ostringstream os;
        os << name << " = " << x << " is not a probability";
        throw InputError(os.str());
    }
}

}  // namespace

void MemoryParams::validate() const {
    require_probability(eta, "eta");
    require_probability(p_n, "p_n");
    require_probability(eta_t, "eta_t");
    require_probability(eta_pol_spread, "eta_pol_spread");
    if (!(f_c >= 0.5 && f_c <= 1.0)) throw InputError("f_c must lie in [1/2, 1]");
    if (!(f_t >= 0.5 && f_t <= 1.0)) throw InputError("f_t must lie in [1/2, 1]");
}

double visibility(double s_max, double s_min) {
    if (!(s_max >= 0.0) || !(s_min >= 0.0)) throw InputError("signals must be nonnegative");
    if (s_max + s_min == 0.0) throw DegenerateInputError("visibility of two zero signals");
    if (s_min > s_max) throw InputError("s_min exceeds s_max");
    return (s_max - s_min) / (s_max + s_min);
}

double classical_fidelity(double v) {
    if (!(v >= -1.0 && v <= 1.0)) throw InputError("visibility outside [-1, 1]");
    return (1.0 + v) / 2.0;
}

double mu1(const MemoryParams& params) {
    if (params.eta == 0.0) throw DegenerateInputError("mu_1 undefined for eta = 0");
    if (!(params.eta > 0.0)) throw InputError("eta must be positive");
    return params.p_n / params.eta;
}

double predicted_fidelity(double mu, double mu_1, double f_c) {
    if (!(mu > 0.0)) throw InputError("mu must be positive");
    if (!(mu_1 >= 0.0)) throw InputError("mu_1 must be nonnegative");
    const double x = mu_1 / mu;
    return (f_c + x) / (1.0 + 2.0 * x);
}

double predicted_fidelity(double mu, const MemoryParams& params) {
    params.validate();
    return predicted_fidelity(mu, mu1(params), params.f_c);
}

double conversion_efficiency(double absorption_prob, double transfer_prob) {
    require_probability(absorption_prob, "absorption_prob");
    require_probability(transfer_prob, "transfer_prob");
    return absorption_prob * transfer_prob;
}

ScheduleReport validate_schedule(const StorageSchedule& s) {
    ScheduleReport r;
    r.total_storage = s.total_storage();
    auto fail = [&](std::string msg) { r.violations.push_back(std::move(msg)); };

    if (!(s.comb_delay > 0) || !(s.mode_duration > 0) || !(s.control_duration > 0) ||
        !(s.rf_pulse_duration > 0) || !(s.spin_time >= 0))
        fail("durations must be positive");
    if (s.n_modes < 1) fail("n_modes must be at least 1");
    if (s.rf_pulse_count < 0) fail("rf_pulse_count must be nonnegative");
    if (s.n_rep < 1) fail("n_rep must be at least 1");

    const double input_train = s.n_modes * s.mode_duration;
    if (input_train + s.control_duration > s.comb_delay) {
        std::ostringstream os;
        os << "input modes (" << input_train << " us) plus control pulse (" << s.control_duration
           << " us) exceed the comb delay (" << s.comb_delay << " us)";
        fail(os.str());
    }
    const double rf_total = s.rf_pulse_count * s.rf_pulse_duration;
    if (rf_total > s.spin_time) {
        std::ostringstream os;
        os << "RF sequence (" << rf_total << " us) does not fit in T_S (" << s.spin_time << " us)";
        fail(os.str());
    }
    return r;
}

double multiplexing_gain(int n_modes) {
    if (n_modes < 1) throw InputError("n_modes must be at least 1");
    return static_cast<double>(n_modes);
}

double spin_decay_factor(const StorageSchedule& s, double linewidth_khz, std::optional<double> t2_dd) {
    if (!(linewidth_khz >= 0.0)) throw InputError("linewidth must be nonnegative");
    if (!t2_dd) return 1.0;
    if (!(*t2_dd > 0.0)) throw InputError("t2_dd must be positive");
    return std::exp(-s.spin_time / *t2_dd);
}

}  // namespace afcmem
