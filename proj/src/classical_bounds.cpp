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

#include "afcmem/classical_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "afcmem/errors.hpp"

namespace afcmem {

namespace {

constexpr int kMaxPhotons = 500;

// Poisson weights P(mu, n) for n = 0..N, truncated once past the mode where
// P < 1e-15 P_max, and tails sum_{k >= n} P(mu, k) accumulated from the top.
struct PoissonTable {
    std::vector<double> pmf;
    std::vector<double> tail;

    explicit PoissonTable(double mu) {
        const double log_mu = std::log(mu);
        const int mode = static_cast<int>(std::floor(mu));
        const double p_max = std::exp(-mu + mode * log_mu - std::lgamma(mode + 1.0));
        double pn = std::exp(-mu);
        for (int n = 0; n <= kMaxPhotons; ++n) {
            if (n > 0) pn = (pn > 0.0) ? pn * mu / n : std::exp(-mu + n * log_mu - std::lgamma(n + 1.0));
            pmf.push_back(pn);
            if (n > mode && n >= 2 && pn < 1e-15 * p_max) break;
        }
        tail.assign(pmf.size() + 1, 0.0);
        for (int n = static_cast<int>(pmf.size()) - 1; n >= 0; --n)
            tail[static_cast<std::size_t>(n)] = tail[static_cast<std::size_t>(n) + 1] + pmf[static_cast<std::size_t>(n)];
    }

    int size() const { return static_cast<int>(pmf.size()); }
};

double mp(int n) { return (n + 1.0) / (n + 2.0); }

}  // namespace

double massar_popescu(int n) {
    if (n < 1) throw InputError("photon number must be at least 1");
    return mp(n);
}

double poisson_conditional_bound(double mu) {
    if (!(mu > 0.0)) throw InputError("mu must be positive");
    if (mu < 0.1) {
        // The closed form loses about 2 log10(1/mu) digits to cancellation; the series converges fast.
        double term = mu, num = 0.0;  // term = mu^n / n!
        for (int n = 1; n < 40 && term > 0.0; ++n) {
            num += mp(n) * term;
            term *= mu / (n + 1);
        }
        return num * std::exp(-mu) / -std::expm1(-mu);
    }
    const double one_minus = -std::expm1(-mu);  // 1 - e^{-mu}
    return ((one_minus - mu + mu * mu) / (mu * mu) - std::exp(-mu) / 2.0) / one_minus;
}

double emission_probability(double mu, double eta_m, EmissionRule rule) {
    return rule == EmissionRule::Exponential ? -std::expm1(-eta_m * mu) : eta_m * -std::expm1(-mu);
}

BoundResult threshold_bound(double mu, double eta_m, EmissionRule rule) {
    if (!(mu > 0.0)) throw InputError("mu must be positive");
    if (!(eta_m > 0.0 && eta_m <= 1.0)) throw InputError("eta_m must lie in (0, 1]");

    const PoissonTable t(mu);
    const double p_emit = emission_probability(mu, eta_m, rule);

    BoundResult r;
    r.feasible = true;
    r.argmax.eta_m1 = eta_m;
    int n_min = 1;
    if (p_emit >= t.tail[1] * (1.0 - 1e-12)) {
        r.degenerate = true;
    } else {
        // Largest n with tail(n) >= P_emit, so tail(n + 1) < P_emit <= tail(n).
        for (int n = t.size() - 1; n >= 1; --n)
            if (t.tail[static_cast<std::size_t>(n)] >= p_emit) {
                n_min = n;
                break;
            }
    }
    const auto idx = static_cast<std::size_t>(n_min);
    const double above = t.tail[idx + 1];
    const double gamma = std::clamp(p_emit - above, 0.0, t.pmf[idx]);

    double num = gamma * mp(n_min);
    for (std::size_t n = idx + 1; n < t.pmf.size(); ++n) num += mp(static_cast<int>(n)) * t.pmf[n];
    const double denom = gamma + above;
    r.bound_fidelity = denom > 0.0 ? num / denom : mp(n_min);
    r.argmax.n_min = n_min;
    r.argmax.gamma = gamma;
    return r;
}

double transmitted_strategy_fidelity(double mu, double f_t, double eta_t, double eta_m, double eta_m1,
                                     double delta, double q, EmissionRule rule, StrategyParams* params) {
    if (!(eta_m1 > 0.0 && eta_m1 <= 1.0) || !(delta >= 0.0 && delta <= 1.0) || !(q >= 0.0 && q <= 1.0)) return -1.0;
    const double f1 = threshold_bound(mu, eta_m1, rule).bound_fidelity;
    const double mixed = (1.0 + q) / 2.0;
    const double denom = mixed - f1;
    if (std::abs(denom) < 1e-14) return -1.0;
    const double p = (eta_t / eta_m1) * (mixed - f_t) / denom;
    if (!(p >= 0.0 && p < 1.0)) return -1.0;
    const double eta = (eta_t - p * eta_m1) / (1.0 - p);
    if (!(eta >= 0.0 && eta < 1.0)) return -1.0;
    const double eta_m2 = (eta_m - p * delta * eta_m1) / ((1.0 - p) * (1.0 - eta));
    if (!(eta_m2 > 0.0 && eta_m2 <= 1.0)) return -1.0;
    const auto second = threshold_bound((1.0 - eta) * mu, eta_m2, rule);
    const double f2 = second.bound_fidelity;
    const double f = (p * delta * eta_m1 * f1 + (1.0 - p) * (1.0 - eta) * eta_m2 * f2) / eta_m;
    if (params) {
        *params = StrategyParams{p, eta, q, delta, eta_m1, eta_m2, second.argmax.n_min, second.argmax.gamma};
    }
    return f;
}

BoundResult transmitted_constrained_bound(double mu, double f_t, double eta_t, double eta_m,
                                          const TransmittedSearch& search) {
    if (!(mu > 0.0)) throw InputError("mu must be positive");
    if (!(f_t >= 0.5 && f_t <= 1.0)) throw InputError("f_t must lie in [1/2, 1]");
    if (!(eta_t > 0.0 && eta_t < 1.0)) throw InputError("eta_t must lie in (0, 1)");
    if (!(eta_m > 0.0 && eta_m <= 1.0)) throw InputError("eta_m must lie in (0, 1]");
    if (search.grid_points < 2 || search.refine_points < 3) throw InputError("search grid too coarse");

    BoundResult best;
    // Second strategy only: p = 0, q = 2 F_t - 1, eta = eta_t, eta_M2 = eta_M / (1 - eta_t).
    const double fallback_m2 = eta_m / (1.0 - eta_t);
    if (fallback_m2 <= 1.0) {
        const auto second = threshold_bound((1.0 - eta_t) * mu, fallback_m2, search.rule);
        best.bound_fidelity = second.bound_fidelity;
        best.argmax = StrategyParams{0.0, eta_t, 2.0 * f_t - 1.0, 0.0, 0.0, fallback_m2, second.argmax.n_min,
                                     second.argmax.gamma};
        best.feasible = true;
    }
    best.fallback_value = best.bound_fidelity;

    struct Axis {
        double lo, hi;
        bool log;
    };
    auto point = [](const Axis& a, int i, int n) {
        const double f = static_cast<double>(i) / (n - 1);
        return a.log ? a.lo * std::pow(a.hi / a.lo, f) : a.lo + (a.hi - a.lo) * f;
    };

    std::array<Axis, 3> axes = {Axis{1e-4, 1.0, true}, Axis{1e-4, 1.0, true}, Axis{0.0, 1.0, false}};
    double best_val = best.feasible ? best.bound_fidelity : -1.0;
    std::array<double, 3> best_x = {0.0, 0.0, 0.0};
    bool from_grid = false;

    auto scan = [&](const std::array<Axis, 3>& ax, int n, bool with_zero_delta) {
        for (int i = 0; i < n; ++i) {
            const double em1 = point(ax[0], i, n);
            for (int j = with_zero_delta ? -1 : 0; j < n; ++j) {
                const double d = j < 0 ? 0.0 : point(ax[1], j, n);
                for (int k = 0; k < n; ++k) {
                    const double q = point(ax[2], k, n);
                    StrategyParams sp;
                    const double f = transmitted_strategy_fidelity(mu, f_t, eta_t, eta_m, em1, d, q, search.rule, &sp);
                    if (f > best_val) {
                        best_val = f;
                        best_x = {em1, d, q};
                        best.argmax = sp;
                        best.feasible = true;
                        from_grid = true;
                    }
                }
            }
        }
    };

    scan(axes, search.grid_points, true);

    // Zoom on the best cell: one coarse step either side, then shrink.
    if (from_grid) {
        std::array<double, 3> half;
        for (int a = 0; a < 3; ++a) {
            const auto& ax = axes[static_cast<std::size_t>(a)];
            half[static_cast<std::size_t>(a)] =
                ax.log ? std::pow(ax.hi / ax.lo, 1.0 / (search.grid_points - 1)) : (ax.hi - ax.lo) / (search.grid_points - 1);
        }
        for (int round = 0; round < search.refine_rounds; ++round) {
            std::array<Axis, 3> local;
            for (int a = 0; a < 3; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                const auto& ax = axes[ua];
                double lo, hi;
                if (ax.log) {
                    const double c = std::max(best_x[ua], ax.lo);
                    lo = std::max(c / half[ua], ax.lo);
                    hi = std::min(c * half[ua], ax.hi);
                } else {
                    lo = std::max(best_x[ua] - half[ua], ax.lo);
                    hi = std::min(best_x[ua] + half[ua], ax.hi);
                }
                local[ua] = Axis{lo, hi, ax.log};
            }
            scan(local, search.refine_points, false);
            for (int a = 0; a < 3; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                half[ua] = axes[ua].log ? std::pow(half[ua], 2.0 / (search.refine_points - 1))
                                        : 2.0 * half[ua] / (search.refine_points - 1);
            }
        }
    }

    best.bound_fidelity = best_val;
    std::ostringstream os;
    os << search.grid_points << "^3 coarse grid (eta_M1 log [1e-4,1], delta {0} + log [1e-4,1], q lin [0,1]) + "
       << search.refine_rounds << " x " << search.refine_points << "^3 refinement";
    best.grid_resolution = os.str();
    return best;
}

Verdict quantumness_verdict(double measured_f, double measured_err, double bound, double k) {
    if (!(measured_err >= 0.0)) throw InputError("measured error must be nonnegative");
    return measured_f - k * measured_err > bound ? Verdict::Quantum : Verdict::Inconclusive;
}

}  // namespace afcmem
