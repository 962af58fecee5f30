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

#include "afcmem/cli.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <ostream>
#include <sstream>

#include "afcmem/csv.hpp"
#include "afcmem/errors.hpp"
#include "afcmem/reference_data.hpp"
#include "afcmem/rng.hpp"

namespace afcmem {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    for (char c : text + ",") {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else {
            item += c;
        }
    }
    return out;
}

template <class T>
T parse_number(const std::string& raw, const std::string& what) {
    const std::string s = trim(raw);
    T v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError(what + ": cannot parse '" + raw + "'");
    return v;
}

bool parse_bool(const std::string& raw, const std::string& what) {
    const std::string s = trim(raw);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError(what + ": expected true or false, got '" + raw + "'");
}

Label parse_label_cfg(const std::string& raw, const std::string& what) {
    const std::string s = trim(raw);
    if (s.size() != 1) throw ConfigError(what + ": expected one of H,V,D,A,R,L, got '" + raw + "'");
    try {
        return parse_label(s);
    } catch (const InputError&) {
        throw ConfigError(what + ": expected one of H,V,D,A,R,L, got '" + raw + "'");
    }
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

std::string join(const std::vector<Label>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(",") : std::string()) + to_char(v[i]);
    return s;
}

/// Standard label closest to a state (largest projector expectation).
Label nearest_label(const PolarizationState& rho) {
    Label best = Label::H;
    for (Label l : kAllLabels)
        if (expectation(rho, AnalysisSetting::of(l)) > expectation(rho, AnalysisSetting::of(best))) best = l;
    return best;
}

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

template <class T, class Ref>
Field number(const char* section, const char* key, Ref ref) {
    const std::string what = std::string(section) + "." + key;
    return {section, key,
            [ref](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return fmt(ref(c));
                else
                    return std::to_string(ref(c));
            },
            [ref, what](RunConfig& c, const std::string& v) { ref(c) = parse_number<T>(v, what); }};
}

template <class Ref>
Field optional_real(const char* section, const char* key, Ref ref) {
    const std::string what = std::string(section) + "." + key;
    return {section, key, [ref](const RunConfig& c) { return ref(c) ? fmt(*ref(c)) : std::string(); },
            [ref, what](RunConfig& c, const std::string& v) {
                if (trim(v).empty())
                    ref(c).reset();
                else
                    ref(c) = parse_number<double>(v, what);
            }};
}

template <class Ref>
Field real_list(const char* section, const char* key, Ref ref) {
    const std::string what = std::string(section) + "." + key;
    return {section, key, [ref](const RunConfig& c) { return join(ref(c)); },
            [ref, what](RunConfig& c, const std::string& v) {
                std::vector<double> out;
                for (const auto& item : split_list(v)) out.push_back(parse_number<double>(item, what));
                ref(c) = out;
            }};
}

// Accessors work on const and mutable configs alike.
#define AFCMEM_REF(expr) [](auto& c) -> auto& { return c.expr; }

std::vector<Field> fields() {
    std::vector<Field> f;
    f.push_back(number<std::uint64_t>("run", "seed", AFCMEM_REF(seed)));
    f.push_back(real_list("run", "mu", AFCMEM_REF(mu)));
    f.push_back(number<std::int64_t>("run", "trials", AFCMEM_REF(trials)));

    f.push_back(number<double>("memory", "eta", AFCMEM_REF(experiment.params.eta)));
    f.push_back(number<double>("memory", "p_n", AFCMEM_REF(experiment.params.p_n)));
    f.push_back(number<double>("memory", "f_c", AFCMEM_REF(experiment.params.f_c)));
    f.push_back(number<double>("memory", "eta_t", AFCMEM_REF(experiment.params.eta_t)));
    f.push_back(number<double>("memory", "f_t", AFCMEM_REF(experiment.params.f_t)));
    f.push_back(number<double>("memory", "eta_pol_spread", AFCMEM_REF(experiment.params.eta_pol_spread)));

    f.push_back(number<double>("schedule", "comb_delay", AFCMEM_REF(experiment.schedule.comb_delay)));
    f.push_back(number<double>("schedule", "spin_time", AFCMEM_REF(experiment.schedule.spin_time)));
    f.push_back(number<double>("schedule", "mode_duration", AFCMEM_REF(experiment.schedule.mode_duration)));
    f.push_back(number<int>("schedule", "n_modes", AFCMEM_REF(experiment.schedule.n_modes)));
    f.push_back(number<double>("schedule", "control_duration", AFCMEM_REF(experiment.schedule.control_duration)));
    f.push_back(number<double>("schedule", "rf_pulse_duration", AFCMEM_REF(experiment.schedule.rf_pulse_duration)));
    f.push_back(number<int>("schedule", "rf_pulse_count", AFCMEM_REF(experiment.schedule.rf_pulse_count)));
    f.push_back(number<int>("schedule", "n_rep", AFCMEM_REF(experiment.schedule.n_rep)));

    f.push_back({"experiment", "input",
                 [](const RunConfig& c) { return std::string(1, to_char(nearest_label(c.experiment.input_state))); },
                 [](RunConfig& c, const std::string& v) {
                     c.experiment.input_state = standard_state(parse_label_cfg(v, "experiment.input"));
                 }});
    f.push_back(number<double>("experiment", "detector_efficiency", AFCMEM_REF(experiment.detector_efficiency)));
    f.push_back(number<double>("experiment", "dark_rate_hz", AFCMEM_REF(experiment.dark_rate_hz)));
    f.push_back(
        number<double>("experiment", "transmission_to_detector", AFCMEM_REF(experiment.transmission_to_detector)));
    f.push_back(number<double>("experiment", "bin_width", AFCMEM_REF(experiment.bin_width)));
    f.push_back(optional_real("experiment", "gate_width", AFCMEM_REF(experiment.gate_width)));
    f.push_back(number<double>("experiment", "noise_port_fraction", AFCMEM_REF(experiment.noise_port_fraction)));
    f.push_back({"experiment", "anisotropy",
                 [](const RunConfig& c) { return std::string(c.experiment.anisotropy ? "true" : "false"); },
                 [](RunConfig& c, const std::string& v) {
                     c.experiment.anisotropy = parse_bool(v, "experiment.anisotropy");
                 }});
    f.push_back(optional_real("experiment", "t2_dd", AFCMEM_REF(experiment.t2_dd)));
    f.push_back(number<double>("experiment", "cp2_leakage", AFCMEM_REF(experiment.cp2_leakage)));

    f.push_back(number<double>("predict", "mu_min", AFCMEM_REF(predict.mu_min)));
    f.push_back(number<double>("predict", "mu_max", AFCMEM_REF(predict.mu_max)));
    f.push_back(number<int>("predict", "points", AFCMEM_REF(predict.points)));
    f.push_back(number<double>("predict", "mu1", AFCMEM_REF(predict.mu1)));
    f.push_back(number<double>("predict", "mu1_err", AFCMEM_REF(predict.mu1_err)));

    f.push_back(number<double>("bounds", "mu_min", AFCMEM_REF(bounds.mu_min)));
    f.push_back(number<double>("bounds", "mu_max", AFCMEM_REF(bounds.mu_max)));
    f.push_back(number<int>("bounds", "points", AFCMEM_REF(bounds.points)));
    f.push_back({"bounds", "rule",
                 [](const RunConfig& c) {
                     return std::string(c.bounds.search.rule == EmissionRule::Linear ? "linear" : "exponential");
                 },
                 [](RunConfig& c, const std::string& v) {
                     const std::string s = trim(v);
                     if (s == "exponential")
                         c.bounds.search.rule = EmissionRule::Exponential;
                     else if (s == "linear")
                         c.bounds.search.rule = EmissionRule::Linear;
                     else
                         throw ConfigError("bounds.rule: expected exponential or linear, got '" + v + "'");
                 }});
    f.push_back(number<int>("bounds", "grid_points", AFCMEM_REF(bounds.search.grid_points)));
    f.push_back(number<int>("bounds", "refine_points", AFCMEM_REF(bounds.search.refine_points)));
    f.push_back(number<int>("bounds", "refine_rounds", AFCMEM_REF(bounds.search.refine_rounds)));
    f.push_back(number<double>("bounds", "k", AFCMEM_REF(bounds.k)));
    f.push_back(real_list("bounds", "measured_mu", AFCMEM_REF(bounds.measured_mu)));
    f.push_back(real_list("bounds", "measured_f", AFCMEM_REF(bounds.measured_f)));
    f.push_back(real_list("bounds", "measured_err", AFCMEM_REF(bounds.measured_err)));

    f.push_back(number<double>("tomography", "mu", AFCMEM_REF(tomography.mu)));
    f.push_back({"tomography", "states", [](const RunConfig& c) { return join(c.tomography.states); },
                 [](RunConfig& c, const std::string& v) {
                     c.tomography.states.clear();
                     for (const auto& item : split_list(v))
                         c.tomography.states.push_back(parse_label_cfg(item, "tomography.states"));
                 }});
    f.push_back(real_list("tomography", "eta", AFCMEM_REF(tomography.eta)));
    f.push_back(real_list("tomography", "p_n", AFCMEM_REF(tomography.p_n)));
    f.push_back(number<int>("tomography", "resamples", AFCMEM_REF(tomography.resamples)));
    return f;
}

#undef AFCMEM_REF

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

class Output {
public:
    Output(const CommandContext& ctx, std::string command) : ctx_(ctx), command_(std::move(command)) {
        std::filesystem::create_directories(ctx.out);
        hash_ = ctx.config.hash();
    }

    std::ofstream open(const std::string& name) const {
        std::ofstream os(ctx_.out / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (ctx_.out / name).string());
        write_metadata(os, CsvMeta{command_, ctx_.config.seed, hash_});
        return os;
    }

    void write_config() const {
        std::ofstream os(ctx_.out / "config.ini", std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (ctx_.out / "config.ini").string());
        os << "; afcmem " << tool_version() << " config_hash=" << hash_ << '\n' << ctx_.config.to_ini();
    }

    std::ostream& log() const {
        static std::ostream null(nullptr);
        return ctx_.log ? *ctx_.log : null;
    }

private:
    const CommandContext& ctx_;
    std::string command_;
    std::string hash_;
};

// ---- predict ---------------------------------------------------------------

void write_prediction(const Output& out, const RunConfig& c, const std::vector<double>& mus,
                      const std::string& name) {
    const auto& p = c.predict;
    auto os = out.open(name);
    os << "# mu1=" << fmt(p.mu1) << " mu1_err=" << fmt(p.mu1_err) << " f_c=" << fmt(c.experiment.params.f_c)
       << '\n';
    write_row(os, {"mu", "fidelity", "fidelity_low", "fidelity_high"});
    for (double mu : mus) {
        if (!(mu > 0.0)) throw ConfigError("mu values must be positive");
        const double f_c = c.experiment.params.f_c;
        write_row(os, {fmt(mu), fmt(predicted_fidelity(mu, p.mu1, f_c)),
                       fmt(predicted_fidelity(mu, p.mu1 + p.mu1_err, f_c)),
                       fmt(predicted_fidelity(mu, std::max(0.0, p.mu1 - p.mu1_err), f_c))});
    }
}

// ---- simulate ---------------------------------------------------------------

struct SimPoint {
    ExperimentConfig config;
    std::vector<CountHistogram> runs;  // parallel, orthogonal, noise
    ParamEstimate estimate;
};

SimPoint simulate_point(ExperimentConfig cfg, std::int64_t trials, std::uint64_t seed) {
    cfg.trials = trials;
    cfg.seed = seed;
    const Label par = nearest_label(cfg.input_state);
    SimPoint s;
    s.runs = {simulate_run(cfg, AnalysisSetting::of(par)), simulate_run(cfg, AnalysisSetting::of(orthogonal(par))),
              simulate_noise_run(cfg, AnalysisSetting::of(par))};
    s.estimate = estimate_params(s.runs, cfg);
    s.config = std::move(cfg);
    return s;
}

double ratio(double a, double b) { return b != 0.0 ? a / b : std::nan(""); }

double model_or_nan(const ExperimentConfig& e, int mode = 0) {
    return e.mu_of(mode) > 0.0 ? model_fidelity(e, mode) : std::nan("");
}

void write_histograms(const Output& out, const SimPoint& s, const std::string& prefix) {
    for (std::size_t i = 0; i < s.runs.size(); ++i) {
        const auto& h = s.runs[i];
        const std::string name = prefix + (h.no_input ? "noise_" : "") + to_char(h.analysis.label) + ".csv";
        auto os = out.open(name);
        os << "# mu=" << fmt(h.no_input ? 0.0 : s.config.mu) << " trials=" << h.trials << '\n';
        write_histogram_csv(os, h);
    }
}

const std::vector<std::string> kEstimateHeader = {
    "eta_hat", "eta_err", "p_n_hat", "p_n_err", "mu1_hat", "fidelity_hat", "fidelity_err", "fidelity_model",
    "eta_t_hat", "eta_t_err", "f_t_hat", "f_t_err", "counts_parallel", "counts_orthogonal", "counts_noise"};

std::vector<std::string> estimate_fields(const ParamEstimate& e, double model) {
    return {fmt(e.eta_hat),      fmt(e.eta_err),
            fmt(e.p_n_hat),      fmt(e.p_n_err),
            fmt(ratio(e.p_n_hat, e.eta_hat)),
            fmt(e.fidelity_hat), fmt(e.fidelity_err),
            fmt(model),          fmt(e.eta_t_hat),
            fmt(e.eta_t_err),    fmt(e.f_t_hat),
            fmt(e.f_t_err),      std::to_string(e.counts_parallel),
            std::to_string(e.counts_orthogonal), std::to_string(e.counts_noise)};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// ---- tomography ---------------------------------------------------------------

struct StateResult {
    Label input;
    ExperimentConfig config;
    TomographyData data;
    DensityMatrixEstimate estimate;
    StateErrors errors;
    double fidelity = 0.0;
};

struct TomographyRun {
    std::vector<StateResult> states;
    ProcessTomographyResult chi;
};

TomographyRun run_tomography(const RunConfig& c) {
    const auto& t = c.tomography;
    std::vector<PolarizationState> inputs;
    for (Label l : t.states) inputs.push_back(standard_state(l));
    try {
        process_tomography(inputs, inputs);
    } catch (const InputError& e) {
        throw ConfigError(std::string("tomography.states: ") + e.what());
    }

    TomographyRun run;
    std::vector<DensityMatrixEstimate> outputs;
    for (std::size_t i = 0; i < t.states.size(); ++i) {
        StateResult r;
        r.input = t.states[i];
        r.config = c.experiment;
        r.config.input_state = inputs[i];
        r.config.mu = t.mu;
        r.config.mu_by_mode.clear();
        r.config.params_by_mode.clear();
        r.config.params.eta = t.eta[i];
        r.config.params.p_n = t.p_n[i];
        r.config.trials = c.trials;
        r.config.seed = derive_seed(c.seed, 0x100 + i);
        r.data = simulate_tomography(r.config);
        r.estimate = mle_state(r.data);
        r.errors = monte_carlo_errors(r.data, t.resamples, derive_seed(c.seed, 0x200 + i), inputs[i]);
        r.fidelity = fidelity(r.estimate.rho_hat, inputs[i]);
        outputs.push_back(r.estimate);
        run.states.push_back(std::move(r));
    }
    run.chi = process_tomography(inputs, outputs);
    return run;
}

void write_tomography(const Output& out, const TomographyRun& run, const std::string& suffix = "") {
    {
        auto os = out.open("tomography_counts" + suffix + ".csv");
        write_row(os, {"input", "analyzer", "count"});
        for (const auto& s : run.states)
            for (const auto& [l, e] : s.data.entries)
                write_row(os, {std::string(1, to_char(s.input)), std::string(1, to_char(l)), fmt(e.count)});
    }
    {
        auto os = out.open("fidelity_by_state" + suffix + ".csv");
        write_row(os, {"input", "mu", "eta", "p_n", "fidelity", "fidelity_err", "fidelity_model", "purity",
                       "purity_err", "log_likelihood", "converged", "low_rank"});
        for (const auto& s : run.states)
            write_row(os, {std::string(1, to_char(s.input)), fmt(s.config.mu), fmt(s.config.params.eta),
                           fmt(s.config.params.p_n), fmt(s.fidelity), fmt(s.errors.fidelity_err),
                           fmt(model_fidelity(s.config)), fmt(s.estimate.rho_hat.purity()),
                           fmt(s.errors.purity_err), fmt(s.estimate.log_likelihood),
                           s.estimate.converged ? "yes" : "no", s.estimate.low_rank ? "yes" : "no"});
    }
    {
        auto os = out.open("chi_raw" + suffix + ".csv");
        write_chi_csv(os, run.chi.raw, false);
    }
    {
        auto os = out.open("chi_projected" + suffix + ".csv");
        write_chi_csv(os, run.chi.projected, true);
    }
}

// ---- bounds ---------------------------------------------------------------

struct BoundPoint {
    double mu = 0.0;
    double plain = 0.0;
    BoundResult threshold;
    BoundResult transmitted;
};

BoundPoint bound_point(const RunConfig& c, double mu) {
    if (!(mu > 0.0)) throw ConfigError("mu values must be positive");
    const auto& p = c.experiment.params;
    return {mu, poisson_conditional_bound(mu), threshold_bound(mu, p.eta, c.bounds.search.rule),
            transmitted_constrained_bound(mu, p.f_t, p.eta_t, p.eta, c.bounds.search)};
}

void write_bounds(const Output& out, const RunConfig& c, const std::vector<double>& mus) {
    auto os = out.open("bounds.csv");
    const auto& p = c.experiment.params;
    os << "# f_t=" << fmt(p.f_t) << " eta_t=" << fmt(p.eta_t) << " eta_m=" << fmt(p.eta)
       << " rule=" << (c.bounds.search.rule == EmissionRule::Linear ? "linear" : "exponential") << '\n';
    bool first = true;
    for (double mu : mus) {
        const auto b = bound_point(c, mu);
        if (first) {
            os << "# search=" << b.transmitted.grid_resolution << '\n';
            write_row(os, {"mu", "plain", "threshold", "transmitted", "transmitted_fallback", "threshold_n_min",
                           "threshold_gamma", "threshold_degenerate", "p", "eta_bs", "q", "delta", "eta_m1",
                           "eta_m2"});
            first = false;
        }
        const auto& a = b.transmitted.argmax;
        write_row(os, {fmt(mu), fmt(b.plain), fmt(b.threshold.bound_fidelity), fmt(b.transmitted.bound_fidelity),
                       fmt(b.transmitted.fallback_value), std::to_string(b.threshold.argmax.n_min),
                       fmt(b.threshold.argmax.gamma), b.threshold.degenerate ? "yes" : "no", fmt(a.p), fmt(a.eta_bs),
                       fmt(a.q), fmt(a.delta), fmt(a.eta_m1), fmt(a.eta_m2)});
    }
}

struct VerdictRow {
    double mu, f, err;
    BoundPoint bounds;
    Verdict verdict;
};

std::vector<VerdictRow> verdicts(const RunConfig& c) {
    const auto& b = c.bounds;
    std::vector<VerdictRow> rows;
    for (std::size_t i = 0; i < b.measured_mu.size(); ++i) {
        const auto bp = bound_point(c, b.measured_mu[i]);
        rows.push_back({b.measured_mu[i], b.measured_f[i], b.measured_err[i], bp,
                        quantumness_verdict(b.measured_f[i], b.measured_err[i], bp.transmitted.bound_fidelity, b.k)});
    }
    return rows;
}

void write_verdicts(const Output& out, const std::vector<VerdictRow>& rows, double k) {
    auto os = out.open("verdicts.csv");
    os << "# quantum iff fidelity - " << fmt(k) << " * fidelity_err > transmitted bound\n";
    write_row(os, {"mu", "fidelity", "fidelity_err", "plain", "threshold", "transmitted", "verdict",
                   "verdict_threshold"});
    for (const auto& r : rows)
        write_row(os, {fmt(r.mu), fmt(r.f), fmt(r.err), fmt(r.bounds.plain),
                       fmt(r.bounds.threshold.bound_fidelity), fmt(r.bounds.transmitted.bound_fidelity),
                       to_string(r.verdict),
                       to_string(quantumness_verdict(r.f, r.err, r.bounds.threshold.bound_fidelity, k))});
}

// ---- reproduce-paper summary ------------------------------------------------

struct SummaryRow {
    std::string quantity;
    double value, reference, reference_err, lower, upper;
    bool within() const { return value >= lower && value <= upper; }
};

// Simulated fidelities against measured ones: 2 points (the closed-form
// tolerance) or 3 combined standard deviations, whichever is wider.
SummaryRow fidelity_row(const std::string& q, double value, double err, double ref, double ref_err) {
    const double tol = std::max(0.02, 3.0 * std::hypot(err, ref_err));
    return {q, value, ref, ref_err, ref - tol, ref + tol};
}

// Estimator against the generator's own parameter: 3 sigma of the estimate.
SummaryRow closure_row(const std::string& q, double value, double err, double truth) {
    return {q, value, truth, 0.0, truth - 3.0 * err, truth + 3.0 * err};
}

}  // namespace

// ---- RunConfig ----------------------------------------------------------------

RunConfig RunConfig::defaults() {
    RunConfig c;
    for (const auto& r : reference::kFidelityVsMu) {
        c.bounds.measured_mu.push_back(r.mu);
        c.bounds.measured_f.push_back(r.fidelity);
        c.bounds.measured_err.push_back(r.fidelity_err);
    }
    for (const auto& s : reference::kFidelityByState) {
        c.tomography.states.push_back(s.input);
        c.tomography.eta.push_back(s.row.eta);
        c.tomography.p_n.push_back(s.row.p_n);
    }
    return c;
}

std::string RunConfig::to_ini() const {
    std::ostringstream os;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            os << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
            section = f.section;
        }
        os << f.key << " = " << f.get(*this) << '\n';
    }
    return os.str();
}

std::string RunConfig::hash() const { return fnv1a64_hex(to_ini()); }

void RunConfig::validate() const {
    if (trials < 1) throw ConfigError("run.trials must be at least 1");
    for (double m : mu)
        if (!(m >= 0.0)) throw ConfigError("run.mu values must be nonnegative");
    ExperimentConfig e = experiment;
    e.trials = trials;
    e.validate();
    if (!(predict.mu_min > 0.0 && predict.mu_max > predict.mu_min) || predict.points < 2)
        throw ConfigError("predict range needs 0 < mu_min < mu_max and at least 2 points");
    if (!(predict.mu1 >= 0.0 && predict.mu1_err >= 0.0)) throw ConfigError("predict.mu1 and mu1_err must be >= 0");
    if (!(bounds.mu_min > 0.0 && bounds.mu_max > bounds.mu_min) || bounds.points < 2)
        throw ConfigError("bounds range needs 0 < mu_min < mu_max and at least 2 points");
    if (bounds.search.grid_points < 2 || bounds.search.refine_points < 3 || bounds.search.refine_rounds < 0)
        throw ConfigError("bounds search grid too coarse");
    if (bounds.measured_f.size() != bounds.measured_mu.size() || bounds.measured_err.size() != bounds.measured_mu.size())
        throw ConfigError("bounds.measured_mu, measured_f and measured_err must have equal lengths");
    if (!(bounds.k >= 0.0)) throw ConfigError("bounds.k must be nonnegative");
    if (tomography.states.empty() || tomography.eta.size() != tomography.states.size() ||
        tomography.p_n.size() != tomography.states.size())
        throw ConfigError("tomography.states, eta and p_n must be nonempty and of equal lengths");
    if (!(tomography.mu > 0.0)) throw ConfigError("tomography.mu must be positive");
    if (tomography.resamples < 100) throw ConfigError("tomography.resamples must be at least 100");
    for (std::size_t i = 0; i < tomography.states.size(); ++i) {
        MemoryParams p = experiment.params;
        p.eta = tomography.eta[i];
        p.p_n = tomography.p_n[i];
        try {
            p.validate();
        } catch (const InputError& err) {
            throw ConfigError(std::string("tomography: ") + err.what());
        }
    }
}

RunConfig parse_config(std::istream& is) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig c = RunConfig::defaults();
    const auto all = fields();
    for (const auto& [section, keys] : tree) {
        if (keys.empty()) throw ConfigError("config: key '" + section + "' outside any section");
        for (const auto& [key, value] : keys) {
            const Field* f = nullptr;
            for (const auto& cand : all)
                if (cand.section == section && cand.key == key) f = &cand;
            if (!f) throw ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
            f->set(c, value.data());
        }
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    return parse_config(is);
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_number<double>(item, "mu list"));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

// ---- commands ---------------------------------------------------------------

void cmd_show_defaults(std::ostream& os) { os << RunConfig::defaults().to_ini(); }

void cmd_predict(const CommandContext& ctx) {
    const Output out(ctx, "predict");
    const auto& c = ctx.config;
    const auto mus = c.mu.empty() ? log_grid(c.predict.mu_min, c.predict.mu_max, c.predict.points) : c.mu;
    write_prediction(out, c, mus, "prediction.csv");
    out.write_config();
    out.log() << "predict: " << mus.size() << " points, mu1=" << fmt(c.predict.mu1)
              << ", F(1.4)=" << fmt(predicted_fidelity(1.4, c.predict.mu1, c.experiment.params.f_c)) << '\n';
}

void cmd_simulate(const CommandContext& ctx) {
    const Output out(ctx, "simulate");
    const auto& c = ctx.config;
    const auto mus = c.mu.empty() ? std::vector<double>{1.4} : c.mu;
    auto os = out.open("estimates.csv");
    write_row(os, concat({"mu", "eta", "p_n"}, kEstimateHeader));
    for (std::size_t i = 0; i < mus.size(); ++i) {
        ExperimentConfig e = c.experiment;
        e.mu = mus[i];
        const auto s = simulate_point(e, c.trials, derive_seed(c.seed, i));
        write_histograms(out, s, "histogram_mu" + fmt(mus[i]) + "_");
        write_row(os, concat({fmt(mus[i]), fmt(e.params.eta), fmt(e.params.p_n)},
                             estimate_fields(s.estimate, model_or_nan(s.config))));
        out.log() << "simulate: mu=" << fmt(mus[i]) << " F=" << fmt(s.estimate.fidelity_hat) << " +- "
                  << fmt(s.estimate.fidelity_err) << " eta=" << fmt(s.estimate.eta_hat) << " +- "
                  << fmt(s.estimate.eta_err) << " p_n=" << fmt(s.estimate.p_n_hat) << " +- "
                  << fmt(s.estimate.p_n_err) << '\n';
    }
    out.write_config();
}

void cmd_tomography(const CommandContext& ctx) {
    const Output out(ctx, "tomography");
    const auto run = run_tomography(ctx.config);
    write_tomography(out, run);
    out.write_config();
    for (const auto& s : run.states)
        out.log() << "tomography: " << to_char(s.input) << " F=" << fmt(s.fidelity) << " +- "
                  << fmt(s.errors.fidelity_err) << '\n';
    out.log() << "tomography: chi00 = " << fmt(run.chi.projected.chi(0, 0).real()) << " (projected), "
              << fmt(run.chi.raw.chi(0, 0).real()) << " (raw)\n";
}

void cmd_bounds(const CommandContext& ctx) {
    const Output out(ctx, "bounds");
    const auto& c = ctx.config;
    const auto mus = c.mu.empty() ? log_grid(c.bounds.mu_min, c.bounds.mu_max, c.bounds.points) : c.mu;
    write_bounds(out, c, mus);
    const auto rows = verdicts(c);
    write_verdicts(out, rows, c.bounds.k);
    out.write_config();
    for (const auto& r : rows)
        out.log() << "bounds: mu=" << fmt(r.mu) << " F=" << fmt(r.f) << " bound=" << fmt(r.bounds.transmitted.bound_fidelity)
                  << " -> " << to_string(r.verdict) << '\n';
}

void cmd_reproduce_paper(const CommandContext& ctx) {
    const Output out(ctx, "reproduce-paper");
    const RunConfig& c = ctx.config;
    std::vector<SummaryRow> summary;

    // Fidelity against mu, |D> input.
    {
        auto os = out.open("fidelity_vs_mu.csv");
        write_row(os, concat(concat({"mu", "eta", "p_n"}, kEstimateHeader),
                             {"fidelity_closed_form", "fidelity_measured", "fidelity_measured_err"}));
        for (std::size_t i = 0; i < reference::kFidelityVsMu.size(); ++i) {
            const auto& r = reference::kFidelityVsMu[i];
            ExperimentConfig e = c.experiment;
            e.input_state = standard_state(Label::D);
            e.mu = r.mu;
            e.params.eta = r.eta;
            e.params.p_n = r.p_n;
            const auto s = simulate_point(e, c.trials, derive_seed(c.seed, 0x10 + i));
            const double closed = predicted_fidelity(r.mu, c.predict.mu1, e.params.f_c);
            write_row(os, concat(concat({fmt(r.mu), fmt(r.eta), fmt(r.p_n)},
                                        estimate_fields(s.estimate, model_or_nan(s.config))),
                                 {fmt(closed), fmt(r.fidelity), fmt(r.fidelity_err)}));
            const std::string tag = "[mu=" + fmt(r.mu) + "]";
            summary.push_back({"closed_form_fidelity" + tag, closed, r.fidelity, r.fidelity_err, r.fidelity - 0.02,
                               r.fidelity + 0.02});
            summary.push_back(fidelity_row("simulated_fidelity" + tag, s.estimate.fidelity_hat,
                                           s.estimate.fidelity_err, r.fidelity, r.fidelity_err));
            summary.push_back(closure_row("eta_hat" + tag, s.estimate.eta_hat, s.estimate.eta_err, r.eta));
            summary.push_back(closure_row("p_n_hat" + tag, s.estimate.p_n_hat, s.estimate.p_n_err, r.p_n));
            if (r.mu == 1.4) write_histograms(out, s, "histogram_");
        }
    }

    // Individual temporal modes.
    {
        ExperimentConfig e = c.experiment;
        e.input_state = standard_state(Label::D);
        for (const auto& r : reference::kFidelityByMode) {
            e.mu_by_mode.push_back(r.mu);
            MemoryParams p = e.params;
            p.eta = r.eta;
            p.p_n = r.p_n;
            e.params_by_mode.push_back(p);
        }
        const auto s = simulate_point(e, c.trials, derive_seed(c.seed, 0x20));
        auto os = out.open("fidelity_by_mode.csv");
        write_row(os, concat(concat({"mode", "mu", "eta", "p_n"}, kEstimateHeader),
                             {"fidelity_measured", "fidelity_measured_err"}));
        for (int m = 0; m < e.schedule.n_modes && m < static_cast<int>(reference::kFidelityByMode.size()); ++m) {
            const auto& r = reference::kFidelityByMode[static_cast<std::size_t>(m)];
            const auto est = estimate_params(s.runs, s.config, m);
            write_row(os, concat(concat({std::to_string(m + 1), fmt(r.mu), fmt(r.eta), fmt(r.p_n)},
                                        estimate_fields(est, model_fidelity(s.config, m))),
                                 {fmt(r.fidelity), fmt(r.fidelity_err)}));
            summary.push_back(fidelity_row("simulated_fidelity[mode=" + std::to_string(m + 1) + "]",
                                           est.fidelity_hat, est.fidelity_err, r.fidelity, r.fidelity_err));
        }
    }

    // Input states and the process matrix.
    {
        RunConfig tc = c;
        tc.tomography = RunConfig::defaults().tomography;
        tc.tomography.resamples = c.tomography.resamples;
        const auto run = run_tomography(tc);
        write_tomography(out, run);
        double mean = 0.0, mean_err2 = 0.0;
        for (std::size_t i = 0; i < run.states.size(); ++i) {
            const auto& s = run.states[i];
            const auto& r = reference::kFidelityByState[i].row;
            summary.push_back(fidelity_row(std::string("tomography_fidelity[") + to_char(s.input) + "]", s.fidelity,
                                           s.errors.fidelity_err, r.fidelity, r.fidelity_err));
            mean += s.fidelity / static_cast<double>(run.states.size());
            mean_err2 += std::pow(s.errors.fidelity_err / static_cast<double>(run.states.size()), 2);
        }
        summary.push_back(fidelity_row("tomography_fidelity[mean]", mean, std::sqrt(mean_err2),
                                       reference::kAverageStateFidelity, 0.001));
        summary.push_back({"chi00_projected", run.chi.projected.chi(0, 0).real(), reference::kChi00, 0.0, 0.72, 0.80});
    }

    // Unabsorbed |R> light per mode.
    {
        ExperimentConfig e = c.experiment;
        e.input_state = standard_state(Label::R);
        e.mu = reference::kFidelityByState[3].row.mu;
        for (const auto& r : reference::kTransmittedByMode) {
            MemoryParams p = e.params;
            p.eta_t = r.transmission;
            p.f_t = r.fidelity;
            e.params_by_mode.push_back(p);
        }
        const auto s = simulate_point(e, c.trials, derive_seed(c.seed, 0x30));
        auto os = out.open("transmitted_by_mode.csv");
        write_row(os, {"mode", "eta_t", "f_t", "eta_t_hat", "eta_t_err", "f_t_hat", "f_t_err", "f_t_measured",
                       "f_t_measured_err"});
        for (int m = 0; m < e.schedule.n_modes && m < static_cast<int>(reference::kTransmittedByMode.size()); ++m) {
            const auto& r = reference::kTransmittedByMode[static_cast<std::size_t>(m)];
            const auto est = estimate_params(s.runs, s.config, m);
            write_row(os, {std::to_string(m + 1), fmt(r.transmission), fmt(r.fidelity), fmt(est.eta_t_hat),
                           fmt(est.eta_t_err), fmt(est.f_t_hat), fmt(est.f_t_err), fmt(r.fidelity),
                           fmt(r.fidelity_err)});
            const std::string tag = "[mode=" + std::to_string(m + 1) + "]";
            summary.push_back(fidelity_row("transmitted_fidelity" + tag, est.f_t_hat, est.f_t_err, r.fidelity,
                                           r.fidelity_err));
            summary.push_back(closure_row("eta_t_hat" + tag, est.eta_t_hat, est.eta_t_err, r.transmission));
        }
    }

    // Closed-form curve and the classical bounds.
    {
        const auto mus = log_grid(c.predict.mu_min, c.predict.mu_max, c.predict.points);
        write_prediction(out, c, mus, "fidelity_curve.csv");
        write_bounds(out, c, log_grid(c.bounds.mu_min, c.bounds.mu_max, c.bounds.points));
        RunConfig vc = c;
        vc.bounds.measured_mu.clear();
        vc.bounds.measured_f.clear();
        vc.bounds.measured_err.clear();
        for (const auto& r : reference::kFidelityVsMu) {
            vc.bounds.measured_mu.push_back(r.mu);
            vc.bounds.measured_f.push_back(r.fidelity);
            vc.bounds.measured_err.push_back(r.fidelity_err);
        }
        const auto rows = verdicts(vc);
        write_verdicts(out, rows, vc.bounds.k);
        for (const auto& r : rows) {
            const double expected = r.mu < 1.0 ? 0.0 : 1.0;  // quantum from mu = 1.4 upward
            const double got = r.verdict == Verdict::Quantum ? 1.0 : 0.0;
            summary.push_back({"verdict_quantum[mu=" + fmt(r.mu) + "]", got, expected, 0.0, expected, expected});
        }
    }

    int outside = 0;
    {
        auto os = out.open("summary.csv");
        write_row(os, {"quantity", "value", "reference", "reference_err", "lower", "upper", "within"});
        for (const auto& r : summary) {
            outside += r.within() ? 0 : 1;
            write_row(os, {r.quantity, fmt(r.value), fmt(r.reference), fmt(r.reference_err), fmt(r.lower),
                           fmt(r.upper), r.within() ? "yes" : "no"});
        }
    }
    out.write_config();
    out.log() << "reproduce-paper: " << summary.size() << " summary rows, " << outside << " out of tolerance\n";
    for (const auto& r : summary)
        if (!r.within()) out.log() << "  out of tolerance: " << r.quantity << " = " << fmt(r.value) << '\n';
}

void run_command(const std::string& name, const CommandContext& ctx) {
    ctx.config.validate();
    if (name == "predict")
        cmd_predict(ctx);
    else if (name == "simulate")
        cmd_simulate(ctx);
    else if (name == "tomography")
        cmd_tomography(ctx);
    else if (name == "bounds")
        cmd_bounds(ctx);
    else if (name == "reproduce-paper")
        cmd_reproduce_paper(ctx);
    else if (name == "show-defaults")
        cmd_show_defaults(ctx.log ? *ctx.log : std::cout);
    else
        throw ConfigError("unknown command '" + name + "'");
}

}  // namespace afcmem
