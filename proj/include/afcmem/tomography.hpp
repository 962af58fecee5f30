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

#ifndef AFCMEM_TOMOGRAPHY_HPP
#define AFCMEM_TOMOGRAPHY_HPP

// Maximum-likelihood state reconstruction from analyzer counts and qubit
// process tomography in the Pauli basis:
//
//     rho_out = sum_{k,l} chi_kl sigma_k rho_in sigma_l^+,   sigma = (I, X, Y, Z).

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "afcmem/polarization.hpp"

namespace afcmem {

struct TomographyData {
    struct Entry {
        double count = 0.0;
        /// Relative exposure (trials x windows) behind this analyzer setting.
        double exposure = 1.0;
        /// Expected background counts (e.g. noise floor) added to the signal.
        double background = 0.0;
    };
    std::map<Label, Entry> entries;

    TomographyData& add(Label label, double count, double exposure = 1.0, double background = 0.0) {
        entries[label] = Entry{count, exposure, background};
        return *this;
    }
    double total_counts() const;
    /// Throws InputError on negative counts or fewer than four independent projectors.
    void validate() const;
};

struct MleOptions {
    int max_iterations = 10000;
    double relative_tolerance = 1e-10;
    /// Keep the log-likelihood of every accepted iterate.
    bool record_history = false;
};

struct DensityMatrixEstimate {
    PolarizationState rho_hat = PolarizationState::maximally_mixed();
    double log_likelihood = 0.0;
    bool converged = false;
    int iterations = 0;
    /// Smallest eigenvalue below 1e-6: the data pin the estimate to the boundary.
    bool low_rank = false;
    std::vector<double> history;
};

/// Poisson maximum likelihood over rho = T^+ T / tr(T^+ T), T lower triangular.
DensityMatrixEstimate mle_state(const TomographyData& data, const MleOptions& options = {});

struct StateErrors {
    double fidelity_err = 0.0;  ///< only when a target is given
    double purity_err = 0.0;
    Eigen::Vector3d bloch_err = Eigen::Vector3d::Zero();
    int resamples = 0;
};

/// Parametric bootstrap: Poisson-resample every count and redo the reconstruction.
StateErrors monte_carlo_errors(const TomographyData& data, int resamples, std::uint64_t seed,
                               const std::optional<PolarizationState>& target = std::nullopt);

using ChiMatrix = Eigen::Matrix4cd;

struct ProcessMatrix {
    ChiMatrix chi = ChiMatrix::Zero();

    static ProcessMatrix identity();
    /// chi_kl = sum_i a_ik conj(a_il) with K_i = sum_k a_ik sigma_k.
    static ProcessMatrix from_kraus(const std::vector<Matrix2c<double>>& kraus);

    /// sum_{k,l} chi_kl sigma_l^+ sigma_k; the identity for trace-preserving chi.
    Matrix2c<double> tp_map() const;
    bool is_hermitian(double tol = 1e-10) const;
    bool is_trace_preserving(double tol = 1e-8) const;
    bool is_completely_positive(double tol = 1e-8) const;
};

/// Raw evaluation of the chi-matrix map.
Matrix2c<double> apply_process(const ChiMatrix& chi, const Matrix2c<double>& rho_in);

struct ProcessOutput {
    PolarizationState state;
    /// Output trace differed from 1 (chi not trace preserving) and was rescaled.
    bool renormalized = false;
};

ProcessOutput apply_process(const ProcessMatrix& chi, const PolarizationState& rho_in);

struct ProcessTomographyResult {
    ProcessMatrix raw;        ///< linear inversion
    ProcessMatrix projected;  ///< nearest Hermitian, trace-preserving, positive chi
    int projection_iterations = 0;
};

/// Linear inversion of the chi-matrix map from input/output pairs (at least
/// four, spanning the operator space), followed by CP/TP projection.
ProcessTomographyResult process_tomography(const std::vector<PolarizationState>& inputs,
                                           const std::vector<PolarizationState>& outputs);
ProcessTomographyResult process_tomography(const std::vector<PolarizationState>& inputs,
                                           const std::vector<DensityMatrixEstimate>& outputs);

/// Frobenius-nearest CP-TP chi (Dykstra alternating projections).
ProcessMatrix project_cptp(const ProcessMatrix& chi, double tol = 1e-9, int max_iterations = 100000,
                           int* iterations = nullptr);

/// CSV rows (row, col, re, im) after a `#` metadata line naming the projection.
void write_chi_csv(std::ostream& os, const ProcessMatrix& chi, bool projected);

}  // namespace afcmem

#endif
