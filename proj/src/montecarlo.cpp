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

#include "afcmem/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "afcmem/csv.hpp"
#include "afcmem/errors.hpp"
#include "afcmem/rng.hpp"

namespace afcmem {

namespace {

constexpr double kMicro = 1e-6;

// Trials are grouped in blocks that each own an engine seeded from
// (seed, block index), so a block can be replayed independently.
constexpr std::int64_t kTrialsPerBlock = 4096;

void require_config_probability(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(std::string(name) + " is not a probability");
}

struct RetrievedChannel {
    Matrix2c<double> rho;  // normalized state entering the depolarizing stage
    double eta = 0.0;
};

RetrievedChannel retrieved_channel(const ExperimentConfig& config, int mode) {
    const MemoryParams& p = config.params_of(mode);
    RetrievedChannel ch{config.input_state.matrix(), p.eta};
    if (config.anisotropy) {
        Matrix2c<double> k = Matrix2c<double>::Zero();
        k(0, 0) = std::sqrt(1.0 + p.eta_pol_spread);
        k(1, 1) = std::sqrt(1.0 - p.eta_pol_spread);
        Matrix2c<double> filtered = k * ch.rho * k.adjoint();
        const double scale = filtered.trace().real();
        ch.rho = filtered / scale;
        ch.eta *= scale;
    }
    ch.eta *= spin_decay_factor(config.schedule, 27.0, config.t2_dd);
    return ch;
}

// rho -> (2F - 1) rho + (1 - F) I: equals F psi psi^+ + (1 - F) psi_perp psi_perp^+ for pure input.
Matrix2c<double> depolarize(const Matrix2c<double>& rho, double f) {
    return (2.0 * f - 1.0) * rho + (1.0 - f) * Matrix2c<double>::Identity();
}


std::int64_t bin_index(const std::vector<double>& edges, double t) {
    auto it = std::upper_bound(edges.begin(), edges.end(), t);
    std::int64_t i = static_cast<std::int64_t>(it - edges.begin()) - 1;
    return std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(edges.size()) - 2);
}

}  // namespace

double ExperimentConfig::mu_of(int mode) const {
    return mu_by_mode.empty() ? mu : mu_by_mode.at(static_cast<std::size_t>(mode));
}

const MemoryParams& ExperimentConfig::params_of(int mode) const {
    return params_by_mode.empty() ? params : params_by_mode.at(static_cast<std::size_t>(mode));
}

void ExperimentConfig::validate() const {
    const auto report = validate_schedule(schedule);
    if (!report.valid()) throw ConfigError("invalid schedule: " + report.violations.front());
    require_config_probability(detector_efficiency, "detector_efficiency");
    require_config_probability(transmission_to_detector, "transmission_to_detector");
    require_config_probability(noise_port_fraction, "noise_port_fraction");
    if (!(dark_rate_hz >= 0.0)) throw ConfigError("dark_rate must be nonnegative");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (!(mu >= 0.0)) throw ConfigError("mu must be nonnegative");
    if (!(cp2_leakage >= 0.0)) throw ConfigError("cp2_leakage must be nonnegative");
    if (!(gate() > 0.0)) throw ConfigError("zero-length detector gate");
    if (!(bin_width > 0.0)) throw ConfigError("bin_width must be positive");
    const double ratio = schedule.mode_duration / bin_width;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
        throw ConfigError("bin_width must divide the mode duration");
    const auto n = static_cast<std::size_t>(schedule.n_modes);
    if (!mu_by_mode.empty()) {
        if (mu_by_mode.size() != n) throw ConfigError("mu_by_mode must have one entry per mode");
        for (double m : mu_by_mode)
            if (!(m >= 0.0)) throw ConfigError("per-mode mu must be nonnegative");
    }
    if (!params_by_mode.empty() && params_by_mode.size() != n)
        throw ConfigError("params_by_mode must have one entry per mode");
    try {
        params.validate();
        for (const auto& p : params_by_mode) p.validate();
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
}

std::uint64_t CountHistogram::window_counts(const std::string& label, std::optional<int> mode) const {
    std::uint64_t total = 0;
    for (const auto& w : windows) {
        if (w.label != label || (mode && w.mode != *mode)) continue;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const double mid = 0.5 * (bin_edges[i] + bin_edges[i + 1]);
            if (mid >= w.start && mid < w.end) total += counts[i];
        }
    }
    return total;
}

std::string CountHistogram::bin_label(std::size_t i) const {
    const double lo = bin_edges[i], hi = bin_edges[i + 1];
    const double mid = 0.5 * (lo + hi);
    for (const auto& w : windows) {
        if (w.blanked ? (lo < w.end && hi > w.start) : (mid >= w.start && mid < w.end)) return w.label;
    }
    return "none";
}

std::vector<Window> sequence_windows(const StorageSchedule& s) {
    std::vector<Window> w;
    const double md = s.mode_duration;
    const double train = s.n_modes * md;
    for (int m = 0; m < s.n_modes; ++m) w.push_back({"input", m, m * md, (m + 1) * md, false});
    w.push_back({"CP1", -1, train, train + s.control_duration, true});
    w.push_back({"CP2", -1, train + s.spin_time, train + s.spin_time + s.control_duration, true});
    const double t_out = s.total_storage();
    for (int m = 0; m < s.n_modes; ++m) w.push_back({"output", m, t_out + m * md, t_out + (m + 1) * md, false});
    return w;
}

double expected_output_counts(const ExperimentConfig& config, const AnalysisSetting& analysis, int mode) {
    const MemoryParams& p = config.params_of(mode);
    const double t_det = config.detection_efficiency();
    const auto ch = retrieved_channel(config, mode);
    const double port = (depolarize(ch.rho, p.f_c) * analysis.projector).trace().real();
    return config.mu_of(mode) * ch.eta * port * t_det + config.noise_port_fraction * p.p_n * t_det +
           config.dark_counts_per_gate();
}

double expected_transmitted_counts(const ExperimentConfig& config, const AnalysisSetting& analysis, int mode) {
    const MemoryParams& p = config.params_of(mode);
    const double port = (depolarize(config.input_state.matrix(), p.f_t) * analysis.projector).trace().real();
    return config.mu_of(mode) * p.eta_t * port * config.detection_efficiency() + config.dark_counts_per_gate();
}

double model_fidelity(const ExperimentConfig& config, int mode) {
    const MemoryParams& p = config.params_of(mode);
    const double eta = p.eta * spin_decay_factor(config.schedule, 27.0, config.t2_dd);
    const double noise = config.noise_port_fraction * p.p_n + config.dark_counts_per_gate() / config.detection_efficiency();
    return predicted_fidelity(config.mu_of(mode), noise / eta, p.f_c);
}

namespace {

CountHistogram run_experiment(const ExperimentConfig& config, const AnalysisSetting& analysis,
                              std::vector<std::uint32_t>* per_trial_output, bool no_input) {
    config.validate();
    const StorageSchedule& s = config.schedule;

    CountHistogram h;
    h.analysis = analysis;
    h.windows = sequence_windows(s);
    h.trials = config.trials;

    const double span = s.total_storage() + 2.0 * s.n_modes * s.mode_duration;
    const auto n_bins = static_cast<std::size_t>(std::ceil(span / config.bin_width - 1e-9));
    h.bin_edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) h.bin_edges[i] = static_cast<double>(i) * config.bin_width;
    h.counts.assign(n_bins, 0);

    // Bins that only see detector dark counts.
    std::vector<std::size_t> background_bins;
    for (std::size_t i = 0; i < n_bins; ++i)
        if (h.bin_label(i) == "none") background_bins.push_back(i);

    struct Source {
        double mean;
        double start, end;
    };
    std::vector<Source> inputs, outputs;
    for (int m = 0; m < s.n_modes; ++m) {
        const double t_in = m * s.mode_duration;
        const double t_out = s.total_storage() + m * s.mode_duration;
        inputs.push_back({expected_transmitted_counts(config, analysis, m), t_in, t_in + s.mode_duration});
        outputs.push_back({expected_output_counts(config, analysis, m), t_out, t_out + s.mode_duration});
    }
    const double background_mean =
        config.dark_rate_hz * kMicro * config.detector_efficiency * config.bin_width *
        static_cast<double>(background_bins.size());
    const Window& cp2 = h.windows[static_cast<std::size_t>(s.n_modes) + 1];

    if (per_trial_output) per_trial_output->assign(static_cast<std::size_t>(config.trials), 0);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](std::mt19937_64& eng, double mean) -> std::uint32_t {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::uint32_t>(mean)(eng);
    };
    auto deposit = [&](std::mt19937_64& eng, const Source& src, std::uint32_t n) {
        for (std::uint32_t k = 0; k < n; ++k) {
            const double t = src.start + unit(eng) * (src.end - src.start);
            ++h.counts[static_cast<std::size_t>(bin_index(h.bin_edges, t))];
        }
    };

    // Each analyzer setting (and the noise run) draws from its own stream.
    const std::uint64_t stream_seed =
        derive_seed(config.seed, static_cast<std::uint64_t>(analysis.label) + (no_input ? kAllLabels.size() : 0));
    const std::int64_t n_blocks = (config.trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
    for (std::int64_t b = 0; b < n_blocks; ++b) {
        std::mt19937_64 eng(derive_seed(stream_seed, static_cast<std::uint64_t>(b)));
        const std::int64_t first = b * kTrialsPerBlock;
        const std::int64_t last = std::min(config.trials, first + kTrialsPerBlock);
        for (std::int64_t trial = first; trial < last; ++trial) {
            std::uint32_t out_total = 0;
            for (int m = 0; m < s.n_modes; ++m) {
                const auto& in = inputs[static_cast<std::size_t>(m)];
                const auto& out = outputs[static_cast<std::size_t>(m)];
                deposit(eng, in, draw(eng, in.mean));
                const std::uint32_t n_out = draw(eng, out.mean);
                deposit(eng, out, n_out);
                out_total += n_out;
            }
            if (!background_bins.empty()) {
                const std::uint32_t n_bg = draw(eng, background_mean);
                for (std::uint32_t k = 0; k < n_bg; ++k) {
                    const auto j = static_cast<std::size_t>(unit(eng) * static_cast<double>(background_bins.size()));
                    ++h.counts[background_bins[std::min(j, background_bins.size() - 1)]];
                }
            }
            if (config.cp2_leakage > 0.0) deposit(eng, {0.0, cp2.start, cp2.end}, draw(eng, config.cp2_leakage));
            if (per_trial_output) (*per_trial_output)[static_cast<std::size_t>(trial)] = out_total;
        }
    }
    h.no_input = no_input;
    return h;
}

}  // namespace

CountHistogram simulate_run(const ExperimentConfig& config, const AnalysisSetting& analysis,
                            std::vector<std::uint32_t>* per_trial_output) {
    return run_experiment(config, analysis, per_trial_output, false);
}

CountHistogram simulate_noise_run(const ExperimentConfig& config, const AnalysisSetting& analysis) {
    ExperimentConfig quiet = config;
    quiet.mu = 0.0;
    quiet.mu_by_mode.clear();
    return run_experiment(quiet, analysis, nullptr, true);
}

ParamEstimate estimate_params(const std::vector<CountHistogram>& histograms, const ExperimentConfig& config,
                              std::optional<int> mode) {
    const CountHistogram* noise = nullptr;
    std::vector<const CountHistogram*> signal;
    for (const auto& h : histograms) {
        if (h.trials <= 0) throw InputError("histogram without trials");
        if (h.no_input)
            noise = &h;
        else
            signal.push_back(&h);
    }
    if (signal.empty()) throw InputError("no signal histograms");
    if (!noise) throw InputError("a no-input run is required to estimate p_n");

    // Parallel analyzer: the one best aligned with the stored state.
    const CountHistogram* par = signal.front();
    for (const auto* h : signal)
        if (expectation(config.input_state, h->analysis) > expectation(config.input_state, par->analysis)) par = h;
    const Label orth_label = orthogonal(par->analysis.label);
    const CountHistogram* orth = nullptr;
    for (const auto* h : signal)
        if (h->analysis.label == orth_label) orth = h;
    if (!orth) throw InputError(std::string("missing the orthogonal analyzer ") + to_char(orth_label));

    std::vector<int> modes;
    if (mode) {
        if (*mode < 0 || *mode >= config.schedule.n_modes) throw InputError("mode index out of range");
        modes.push_back(*mode);
    } else {
        for (int m = 0; m < config.schedule.n_modes; ++m) modes.push_back(m);
    }
    double mu = 0.0;
    for (int m : modes) mu += config.mu_of(m);
    mu /= static_cast<double>(modes.size());

    const double t_det = config.detection_efficiency();
    const double n_windows = static_cast<double>(modes.size());
    auto rate = [&](const CountHistogram& h, const std::string& label) {
        std::uint64_t n = mode ? h.window_counts(label, *mode) : h.window_counts(label);
        return std::pair<double, std::uint64_t>{static_cast<double>(n) / (static_cast<double>(h.trials) * n_windows), n};
    };
    auto rate_err = [&](const CountHistogram& h, std::uint64_t n) {
        return std::sqrt(static_cast<double>(n)) / (static_cast<double>(h.trials) * n_windows);
    };

    ParamEstimate e;
    const auto [r_par, n_par] = rate(*par, "output");
    const auto [r_orth, n_orth] = rate(*orth, "output");
    const auto [r_noise, n_noise] = rate(*noise, "output");
    e.counts_parallel = n_par;
    e.counts_orthogonal = n_orth;
    e.counts_noise = n_noise;
    if (n_par + n_orth == 0) throw EstimationError("zero output counts: insufficient statistics");

    const double dark = config.dark_counts_per_gate();
    const double s_noise = rate_err(*noise, n_noise);
    const double port = config.noise_port_fraction > 0.0 ? config.noise_port_fraction : 1.0;
    e.p_n_hat = (r_noise - dark) / (port * t_det);
    e.p_n_err = s_noise / (port * t_det);

    // Both ports together collect the full retrieved signal plus two noise floors.
    const double s_par = rate_err(*par, n_par), s_orth = rate_err(*orth, n_orth);
    if (mu > 0.0) {
        e.eta_hat = (r_par + r_orth - 2.0 * r_noise) / (mu * t_det);
        e.eta_err = std::sqrt(s_par * s_par + s_orth * s_orth + 4.0 * s_noise * s_noise) / (mu * t_det);
    }

    const double n_tot = static_cast<double>(n_par + n_orth);
    e.fidelity_hat = static_cast<double>(n_par) / n_tot;
    e.fidelity_err = std::sqrt(e.fidelity_hat * (1.0 - e.fidelity_hat) / n_tot);

    const auto [t_par, m_par] = rate(*par, "input");
    const auto [t_orth, m_orth] = rate(*orth, "input");
    if (m_par + m_orth > 0 && mu > 0.0) {
        const double st_par = rate_err(*par, m_par), st_orth = rate_err(*orth, m_orth);
        e.eta_t_hat = (t_par + t_orth - 2.0 * dark) / (mu * t_det);
        e.eta_t_err = std::sqrt(st_par * st_par + st_orth * st_orth) / (mu * t_det);
        const double m_tot = static_cast<double>(m_par + m_orth);
        e.f_t_hat = static_cast<double>(m_par) / m_tot;
        e.f_t_err = std::sqrt(e.f_t_hat * (1.0 - e.f_t_hat) / m_tot);
    }
    return e;
}

TomographyData simulate_tomography(const ExperimentConfig& config, std::optional<int> mode) {
    TomographyData data;
    for (Label l : kAllLabels)
        data.add(l, static_cast<double>(simulate_run(config, AnalysisSetting::of(l)).window_counts("output", mode)));
    return data;
}

void write_histogram_csv(std::ostream& os, const CountHistogram& h) {
    os << "bin_start_us,bin_end_us,counts,window_label,analysis_label\n";
    const char a = to_char(h.analysis.label);
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        os << fmt(h.bin_edges[i]) << ',' << fmt(h.bin_edges[i + 1]) << ',' << h.counts[i] << ',' << h.bin_label(i) << ','
           << a << '\n';
    }
}

}  // namespace afcmem
