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

#include "afcmem/tomography.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "afcmem/errors.hpp"
#include "afcmem/montecarlo.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

using namespace afcmem;

namespace {

const std::vector<Label> kProbe = {Label::H, Label::V, Label::D, Label::R};

std::vector<PolarizationState> probe_states() {
    std::vector<PolarizationState> s;
    for (Label l : kProbe) s.push_back(standard_state(l));
    return s;
}

Eigen::Matrix4cd unit(int k) {
    Eigen::Matrix4cd e = Eigen::Matrix4cd::Zero();
    e(k, k) = 1.0;
    return e;
}

TomographyData d_like() {
    TomographyData d;
    d.add(Label::H, 500).add(Label::V, 510).add(Label::D, 880).add(Label::A, 120).add(Label::R, 480).add(Label::L, 530);
    return d;
}

}  // namespace

TEST(tomography, ideal_d_counts) {
    TomographyData d;
    d.add(Label::D, 1000).add(Label::A, 0).add(Label::H, 500).add(Label::V, 500).add(Label::R, 500).add(Label::L, 500);
    const auto e = mle_state(d);
    EXPECT_TRUE(e.converged);
    EXPECT_LT(trace_distance(e.rho_hat, standard_state(Label::D)), 1e-3);
    EXPECT_TRUE(e.low_rank);
}

TEST(tomography, uniform_counts) {
    TomographyData d;
    for (Label l : kAllLabels) d.add(l, 700);
    const auto e = mle_state(d);
    EXPECT_TRUE(e.converged);
    EXPECT_LT(trace_distance(e.rho_hat, PolarizationState::maximally_mixed()), 1e-3);
    EXPECT_FALSE(e.low_rank);
}

TEST(tomography, likelihood_never_decreases) {
    MleOptions o;
    o.record_history = true;
    const auto e = mle_state(d_like(), o);
    ASSERT_GE(e.history.size(), 2u);
    for (std::size_t i = 1; i < e.history.size(); ++i) EXPECT_GE(e.history[i], e.history[i - 1]);
    EXPECT_DOUBLE_EQ(e.history.back(), e.log_likelihood);
}

TEST(tomography, interior_estimate_matches_linear_inversion) {
    // Full-rank data: the unconstrained optimum is rho with Pauli components
    // (n_+ - n_-) / (n_+ + n_-), and the trace fixed by the six counts.
    const auto e = mle_state(d_like());
    const Eigen::Vector4d c = pauli_components(e.rho_hat.matrix());
    EXPECT_NEAR(c(1), (880.0 - 120.0) / 1000.0, 2e-3);
    EXPECT_NEAR(c(3), (500.0 - 510.0) / 1010.0, 2e-3);
    EXPECT_NEAR(c(2), (480.0 - 530.0) / 1010.0, 2e-3);
}

TEST(tomography, background_is_removed) {
    TomographyData d;
    d.add(Label::D, 1100).add(Label::A, 100).add(Label::H, 600).add(Label::V, 600).add(Label::R, 600).add(Label::L, 600);
    for (auto& [l, e] : d.entries) e.background = 100.0;
    const auto e = mle_state(d);
    EXPECT_GT(fidelity(e.rho_hat, standard_state(Label::D)), 0.999);
}

TEST(tomography, estimate_always_physical) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> n(0, 50);
    for (int rep = 0; rep < 20; ++rep) {
        TomographyData d;
        for (Label l : kAllLabels) d.add(l, n(rng));
        d.entries[Label::H].count += 1;
        const auto e = mle_state(d);
        const Eigen::Matrix2cd r = e.rho_hat.matrix();
        EXPECT_NEAR(r.trace().real(), 1.0, 1e-12);
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(r).eigenvalues().minCoeff(), -1e-12);
    }
}

TEST(tomography, degenerate_data_flagged) {
    TomographyData d;
    for (Label l : kAllLabels) d.add(l, 0);
    d.entries[Label::R].count = 1000;
    DensityMatrixEstimate e;
    EXPECT_NO_THROW(e = mle_state(d));
    EXPECT_TRUE(e.low_rank);
}

TEST(tomography, input_validation) {
    TomographyData few;
    few.add(Label::H, 10).add(Label::V, 10).add(Label::D, 10);
    EXPECT_THROW(mle_state(few), InputError);
    TomographyData dependent;
    dependent.add(Label::H, 10).add(Label::V, 10).add(Label::D, 10).add(Label::A, 10);
    EXPECT_THROW(mle_state(dependent), InputError);
    TomographyData negative = d_like();
    negative.entries[Label::A].count = -1;
    EXPECT_THROW(mle_state(negative), InputError);
    TomographyData empty;
    for (Label l : kAllLabels) empty.add(l, 0);
    EXPECT_THROW(mle_state(empty), EstimationError);
    EXPECT_THROW(monte_carlo_errors(empty, 100, 1), EstimationError);
    EXPECT_THROW(monte_carlo_errors(d_like(), 50, 1), InputError);
}

TEST(tomography, bootstrap_stable_in_resample_count) {
    const auto target = standard_state(Label::D);
    const auto a = monte_carlo_errors(d_like(), 100, 11, target);
    const auto b = monte_carlo_errors(d_like(), 1000, 11, target);
    EXPECT_EQ(b.resamples, 1000);
    EXPECT_NEAR(a.fidelity_err / b.fidelity_err, 1.0, 0.3);
    EXPECT_NEAR(a.purity_err / b.purity_err, 1.0, 0.3);
    // Binomial reference for the D/A split: sqrt(F (1 - F) / N).
    EXPECT_NEAR(b.fidelity_err, std::sqrt(0.88 * 0.12 / 1000.0), 0.3 * std::sqrt(0.88 * 0.12 / 1000.0));
    const auto c = monte_carlo_errors(d_like(), 100, 11, target);
    EXPECT_EQ(a.fidelity_err, c.fidelity_err);
}

TEST(tomography, simulated_d_state_at_mu_1_4) {
    ExperimentConfig c;
    c.mu = 1.4;
    c.params.eta = 0.036;
    c.params.p_n = 0.0101;
    c.trials = 1000000;
    const auto data = simulate_tomography(c);
    const auto e = mle_state(data);
    const auto err = monte_carlo_errors(data, 200, 3, standard_state(Label::D));
    const double f = fidelity(e.rho_hat, standard_state(Label::D));
    EXPECT_GT(err.fidelity_err, 1e-3);
    EXPECT_LT(err.fidelity_err, 4e-2);
    const double dark = c.dark_counts_per_gate() / c.detection_efficiency();
    const double model = predicted_fidelity(1.4, (c.params.p_n + dark) / c.params.eta, c.params.f_c);
    EXPECT_NEAR(f, model, 3.0 * err.fidelity_err);
    // Forward model vs the measured 85.5 %: 2 points, as for the closed form.
    EXPECT_NEAR(f, 0.855, 0.02);
}

TEST(tomography, apply_identity_and_bit_flip) {
    std::mt19937_64 rng(3);
    ProcessMatrix id;
    id.chi = unit(0);
    const auto rho = test::random_state(rng);
    const auto out = apply_process(id, rho);
    EXPECT_FALSE(out.renormalized);
    EXPECT_LT((out.state.matrix() - rho.matrix()).norm(), 1e-14);

    ProcessMatrix x;
    x.chi = unit(1);
    EXPECT_LT(trace_distance(apply_process(x, standard_state(Label::H)).state, standard_state(Label::V)), 1e-14);
}

TEST(tomography, non_trace_preserving_output_is_renormalized) {
    ProcessMatrix half;
    half.chi = 0.5 * unit(0);
    EXPECT_FALSE(half.is_trace_preserving());
    const auto out = apply_process(half, standard_state(Label::R));
    EXPECT_TRUE(out.renormalized);
    EXPECT_LT(trace_distance(out.state, standard_state(Label::R)), 1e-14);
}

TEST(tomography, identity_and_x_channels_recovered) {
    const auto in = probe_states();
    auto r = process_tomography(in, in);
    EXPECT_LT((r.raw.chi - unit(0)).norm(), 1e-12);
    EXPECT_LT((r.projected.chi - unit(0)).norm(), 1e-9);

    ProcessMatrix x;
    x.chi = unit(1);
    std::vector<PolarizationState> out;
    for (const auto& s : in) out.push_back(apply_process(x, s).state);
    r = process_tomography(in, out);
    EXPECT_LT((r.raw.chi - unit(1)).norm(), 1e-12);
}

TEST(tomography, rank_deficient_inputs_rejected) {
    std::vector<PolarizationState> in;
    for (Label l : {Label::H, Label::V, Label::D, Label::A}) in.push_back(standard_state(l));
    EXPECT_THROW(process_tomography(in, in), InputError);
    const auto three = std::vector<PolarizationState>(in.begin(), in.begin() + 3);
    EXPECT_THROW(process_tomography(three, three), InputError);
}

TEST(tomography, random_channels_round_trip) {
    std::mt19937_64 rng(2026);
    const auto in = probe_states();
    for (int rep = 0; rep < 10; ++rep) {
        const auto truth = ProcessMatrix::from_kraus(test::random_kraus(rng, 1 + rep % 4));
        ASSERT_TRUE(truth.is_trace_preserving());
        ASSERT_TRUE(truth.is_completely_positive());
        std::vector<PolarizationState> out;
        for (const auto& s : in) out.push_back(apply_process(truth, s).state);
        const auto r = process_tomography(in, out);
        EXPECT_LT((r.raw.chi - truth.chi).norm(), 1e-6) << "draw " << rep;
        EXPECT_LT((r.projected.chi - truth.chi).norm(), 1e-6) << "draw " << rep;
    }
}

TEST(tomography, projection_is_idempotent_and_physical) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        const auto cptp = ProcessMatrix::from_kraus(test::random_kraus(rng, 2));
        EXPECT_LT((project_cptp(cptp).chi - cptp.chi).norm(), 1e-10);

        ProcessMatrix noisy = cptp;
        std::normal_distribution<double> n(0.0, 0.05);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) noisy.chi(i, j) += std::complex<double>(n(rng), n(rng));
        const auto p = project_cptp(noisy);
        EXPECT_TRUE(p.is_hermitian());
        EXPECT_TRUE(p.is_trace_preserving());
        EXPECT_TRUE(p.is_completely_positive());
        EXPECT_LT((project_cptp(p).chi - p.chi).norm(), 1e-8);
    }
}

TEST(tomography, pauli_channel_fit_to_per_state_fidelities) {
    // Pauli-diagonal chi: F(H) = F(V) = c0 + c3, F(D) = c0 + c1, F(R) = c0 + c2,
    // with c0 + c1 + c2 + c3 = 1. Least squares on the four measured fidelities.
    const double f[4] = {0.841, 0.840, 0.855, 0.826};
    Eigen::Matrix<double, 5, 4> a;
    a << 1, 0, 0, 1, 1, 0, 0, 1, 1, 1, 0, 0, 1, 0, 1, 0, 1, 1, 1, 1;
    Eigen::Matrix<double, 5, 1> b;
    b << f[0], f[1], f[2], f[3], 1.0;
    const Eigen::Vector4d w = a.colPivHouseholderQr().solve(b);
    EXPECT_NEAR(w(0), 0.762, 0.01);

    ProcessMatrix chi;
    chi.chi = w.cast<std::complex<double>>().asDiagonal();
    const auto in = probe_states();
    for (std::size_t i = 0; i < 4; ++i) {
        const auto out = apply_process(chi, in[i]);
        EXPECT_NEAR(fidelity(out.state, in[i]), f[i], 0.01) << to_char(kProbe[i]);
    }
}

TEST(tomography, chi_csv) {
    std::ostringstream os;
    write_chi_csv(os, ProcessMatrix::identity(), true);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line.rfind("#", 0), 0u);
    EXPECT_NE(line.find("projection_applied=yes"), std::string::npos);
    std::getline(is, line);
    EXPECT_EQ(line, "row,col,re,im");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 16);
}
