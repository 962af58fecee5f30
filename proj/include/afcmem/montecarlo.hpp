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

#ifndef AFCMEM_MONTECARLO_HPP
#define AFCMEM_MONTECARLO_HPP

// Photon-counting simulation of the multiplexed storage experiment.
//
// One trial is one storage sequence: n_modes input pulses at t = 0, the two
// control pulses (detector gated off), and the retrieved pulses starting at
// t = 1/Delta + T_S. Each window's count is Poisson; counts land uniformly in
// the window's time bins. Times are in microseconds.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "afcmem/memory_model.hpp"
#include "afcmem/polarization.hpp"
#include "afcmem/tomography.hpp"

namespace afcmem {

struct ExperimentConfig {
    PolarizationState input_state = standard_state(Label::D);
    /// Mean photon number per mode at the memory input.
    double mu = 1.4;
    /// Optional per-mode override of `mu` (size n_modes).
    std::vector<double> mu_by_mode;
    StorageSchedule schedule;
    MemoryParams params;
    /// Optional per-mode override of `params` (size n_modes).
    std::vector<MemoryParams> params_by_mode;

    double detector_efficiency = 0.57;
    double dark_rate_hz = 15.0;
    double transmission_to_detector = 0.07;
    double bin_width = 0.25;
    /// Detector gate per mode window; defaults to the mode duration.
    std::optional<double> gate_width;
    std::int64_t trials = 100000;
    std::uint64_t seed = 1;

    /// Fraction of p_n landing in one analyzer port. 1 means p_n is the noise
    /// probability as measured behind a single PBS port.
    double noise_port_fraction = 1.0;
    /// Apply the +/- eta_pol_spread H/V efficiency anisotropy.
    bool anisotropy = false;
    /// Residual spin-coherence envelope applied on top of eta.
    std::optional<double> t2_dd;
    /// Display-only control-pulse leakage through the CP2 gate (mean counts per trial).
    double cp2_leakage = 0.0;

    double detection_efficiency() const { return transmission_to_detector * detector_efficiency; }
    double gate() const { return gate_width.value_or(schedule.mode_duration); }
    /// Mean dark counts per gated window, dark_rate * gate * detector_efficiency.
    double dark_counts_per_gate() const { return dark_rate_hz * 1e-6 * gate() * detector_efficiency; }
    double mu_of(int mode) const;
    const MemoryParams& params_of(int mode) const;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

struct Window {
    std::string label;  ///< "input", "CP1", "CP2" or "output"
    int mode = -1;      ///< temporal mode for input/output windows
    double start = 0.0;
    double end = 0.0;
    bool blanked = false;
};

struct CountHistogram {
    std::vector<double> bin_edges;
    std::vector<std::uint64_t> counts;
    AnalysisSetting analysis = AnalysisSetting::of(Label::H);
    std::vector<Window> windows;
    std::int64_t trials = 0;
    bool no_input = false;

    std::size_t bins() const { return counts.size(); }
    /// Sum over windows with this label, optionally restricted to one mode.
    std::uint64_t window_counts(const std::string& label, std::optional<int> mode = std::nullopt) const;
    /// Window label covering bin `i`, or "none".
    std::string bin_label(std::size_t i) const;
};

/// Timing windows of one storage sequence.
std::vector<Window> sequence_windows(const StorageSchedule& s);

/// Expected per-trial counts in the output (retrieved) window of `mode`.
double expected_output_counts(const ExperimentConfig& config, const AnalysisSetting& analysis, int mode);
/// Expected per-trial counts in the input window of `mode` (light transmitted
/// through the crystal).
double expected_transmitted_counts(const ExperimentConfig& config, const AnalysisSetting& analysis,
                                   int mode);

/// Runs config.trials storage sequences. When `per_trial_output` is given it
/// receives the summed output-window count of every trial.
/// Conditional fidelity the generator converges to for `mode`: the closed form
/// with the noise floor raised by the dark counts and eta by the spin envelope.
/// Ignores the anisotropy filter.
double model_fidelity(const ExperimentConfig& config, int mode = 0);

CountHistogram simulate_run(const ExperimentConfig& config, const AnalysisSetting& analysis,
                            std::vector<std::uint32_t>* per_trial_output = nullptr);

/// Same protocol with no input pulse (the unconditional noise floor).
CountHistogram simulate_noise_run(const ExperimentConfig& config, const AnalysisSetting& analysis);

struct ParamEstimate {
    double eta_hat = 0, eta_err = 0;
    double p_n_hat = 0, p_n_err = 0;
    double fidelity_hat = 0, fidelity_err = 0;
    double eta_t_hat = 0, eta_t_err = 0;
    double f_t_hat = 0, f_t_err = 0;
    std::uint64_t counts_parallel = 0;
    std::uint64_t counts_orthogonal = 0;
    std::uint64_t counts_noise = 0;
};

/// Estimates eta, p_n and the conditional fidelity from histograms that include
/// the analyzer parallel and orthogonal to the stored state, plus a no-input
/// run. Restricted to one temporal mode when `mode` is set.
ParamEstimate estimate_params(const std::vector<CountHistogram>& histograms, const ExperimentConfig& config,
                              std::optional<int> mode = std::nullopt);

/// CSV with columns bin_start_us,bin_end_us,counts,window_label,analysis_label.
/// Output-window counts of `config.input_state` behind each of the six analyzers.
TomographyData simulate_tomography(const ExperimentConfig& config, std::optional<int> mode = std::nullopt);

void write_histogram_csv(std::ostream& os, const CountHistogram& h);

}  // namespace afcmem

#endif
