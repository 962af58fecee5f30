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

#ifndef AFCMEM_CLASSICAL_BOUNDS_HPP
#define AFCMEM_CLASSICAL_BOUNDS_HPP

// Best conditional fidelities a measure-and-prepare (classical) device can
// reach when probed with phase-randomized coherent states of mean mu. A memory
// whose measured fidelity beats the relevant bound is certified quantum.

#include <string>
#include <vector>

namespace afcmem {

/// How the classical device's emission probability is matched to a memory of
/// efficiency eta_M.
enum class EmissionRule {
    /// 1 - exp(-eta_M mu): a coherent output of mean eta_M mu clicks.
    Exponential,
    /// eta_M (1 - exp(-mu)).
    Linear,
};

struct StrategyParams {
    double p = 0.0;        ///< probability of measuring the whole input
    double eta_bs = 0.0;   ///< beamsplitter transmission of the second strategy
    double q = 0.0;        ///< probability of sending a fully mixed transmitted state
    double delta = 0.0;    ///< output-arm loss of the first strategy
    double eta_m1 = 0.0;   ///< emission efficiency of the first strategy
    double eta_m2 = 0.0;   ///< emission efficiency of the second strategy
    int n_min = 0;         ///< threshold photon number
    double gamma = 0.0;    ///< partial occupancy of n_min
};

struct BoundResult {
    double bound_fidelity = 0.0;
    StrategyParams argmax;
    bool feasible = false;
    /// Emission probability reached the whole nonvacuum mass; threshold clamped to n_min = 1.
    bool degenerate = false;
    std::string grid_resolution;
    /// Value of the always-feasible second-strategy-only point (transmitted bound only).
    double fallback_value = 0.0;
};

/// (n + 1) / (n + 2): optimal fidelity for a qubit carried by n photons.
double massar_popescu(int n);

/// Conditional fidelity of measure-and-prepare on a phase-randomized coherent
/// state, averaged over n >= 1.
double poisson_conditional_bound(double mu);

/// Probability the classical device must emit to mimic efficiency eta_m.
double emission_probability(double mu, double eta_m, EmissionRule rule = EmissionRule::Exponential);

/// Measure-and-prepare that answers only for n > n_min photons (and a fraction
/// gamma of n = n_min), tuned to reproduce the memory's emission probability.
BoundResult threshold_bound(double mu, double eta_m, EmissionRule rule = EmissionRule::Exponential);

struct TransmittedSearch {
    int grid_points = 50;     ///< per axis of the coarse (eta_M1, delta, q) grid
    int refine_points = 11;   ///< per axis of every refinement grid
    int refine_rounds = 6;
    EmissionRule rule = EmissionRule::Exponential;
};

/// Best output fidelity of the two-strategy device that must also reproduce the
/// transmitted pulse (fidelity f_t, efficiency eta_t) and the output efficiency eta_m.
BoundResult transmitted_constrained_bound(double mu, double f_t, double eta_t, double eta_m,
                                          const TransmittedSearch& search = {});

/// Output fidelity of one (eta_M1, delta, q) choice, or a negative value when the
/// eliminated parameters leave their ranges. Fills `params` when feasible.
double transmitted_strategy_fidelity(double mu, double f_t, double eta_t, double eta_m, double eta_m1,
                                     double delta, double q, EmissionRule rule, StrategyParams* params = nullptr);

enum class Verdict { Quantum, Inconclusive };

/// Quantum iff measured_f - k * measured_err > bound.
Verdict quantumness_verdict(double measured_f, double measured_err, double bound, double k = 1.0);

inline const char* to_string(Verdict v) { return v == Verdict::Quantum ? "quantum" : "inconclusive"; }

}  // namespace afcmem

#endif
