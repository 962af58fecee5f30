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

#ifndef AFCMEM_POLARIZATION_HPP
#define AFCMEM_POLARIZATION_HPP

// Polarization-qubit algebra in the fixed {|H>, |V>} basis.
//
// States are 2x2 density matrices; analyzers are rank-1 projectors for the six
// standard polarizations. |R> = (|H> + i|V>)/sqrt(2), |L> carries -i.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>

#include "afcmem/errors.hpp"

namespace afcmem {

template <typename Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar>
using Vector2c = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

enum class Label { H, V, D, A, R, L };

inline constexpr std::array<Label, 6> kAllLabels = {Label::H, Label::V, Label::D,
                                                    Label::A, Label::R, Label::L};

inline char to_char(Label l) {
    static constexpr char names[] = {'H', 'V', 'D', 'A', 'R', 'L'};
    return names[static_cast<int>(l)];
}

inline Label parse_label(std::string_view s) {
    if (s.size() == 1) {
        switch (s[0]) {
            case 'H': case 'h': return Label::H;
            case 'V': case 'v': return Label::V;
            case 'D': case 'd': return Label::D;
            case 'A': case 'a': return Label::A;
            case 'R': case 'r': return Label::R;
            case 'L': case 'l': return Label::L;
            default: break;
        }
    }
    throw InputError("unknown polarization label '" + std::string(s) + "'");
}

/// The orthogonal polarization (the other PBS port of the same basis).
inline Label orthogonal(Label l) {
    switch (l) {
        case Label::H: return Label::V;
        case Label::V: return Label::H;
        case Label::D: return Label::A;
        case Label::A: return Label::D;
        case Label::R: return Label::L;
        case Label::L: return Label::R;
    }
    return l;
}

template <typename Scalar = double>
Vector2c<Scalar> standard_ket(Label l) {
    using C = std::complex<Scalar>;
    const Scalar s = Scalar(1) / std::sqrt(Scalar(2));
    Vector2c<Scalar> k;
    switch (l) {
        case Label::H: k << C(1), C(0); break;
        case Label::V: k << C(0), C(1); break;
        case Label::D: k << C(s), C(s); break;
        case Label::A: k << C(s), C(-s); break;
        case Label::R: k << C(s), C(0, s); break;
        case Label::L: k << C(s), C(0, -s); break;
    }
    return k;
}

/// Identity and Pauli matrices in the fixed order (I, X, Y, Z).
template <typename Scalar = double>
const std::array<Matrix2c<Scalar>, 4>& pauli_basis() {
    using C = std::complex<Scalar>;
    static const std::array<Matrix2c<Scalar>, 4> basis = [] {
        std::array<Matrix2c<Scalar>, 4> b;
        b[0] << C(1), C(0), C(0), C(1);
        b[1] << C(0), C(1), C(1), C(0);
        b[2] << C(0), C(0, -1), C(0, 1), C(0);
        b[3] << C(1), C(0), C(0), C(-1);
        return b;
    }();
    return basis;
}

/// A validated single-qubit density matrix.
template <typename Scalar = double>
class PolarizationStateT {
   public:
    using Matrix = Matrix2c<Scalar>;

    /// Validates trace, hermiticity and positivity; throws InputError otherwise.
    static PolarizationStateT from_matrix(const Matrix& rho) {
        if (!rho.allFinite()) throw InputError("density matrix has non-finite entries");
        const auto tr = rho.trace();
        if (std::abs(tr - std::complex<Scalar>(1)) > Scalar(1e-12))
            throw InputError("density matrix trace differs from 1");
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > Scalar(1e-12))
            throw InputError("density matrix is not Hermitian");
        Matrix herm = (rho + rho.adjoint()) / Scalar(2);
        Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < Scalar(-1e-10))
            throw InputError("density matrix is not positive semidefinite");
        return PolarizationStateT(herm);
    }

    static PolarizationStateT pure(const Vector2c<Scalar>& ket) {
        const Scalar n = ket.norm();
        if (!(n > Scalar(0))) throw InputError("zero ket");
        Vector2c<Scalar> k = ket / n;
        return PolarizationStateT(k * k.adjoint());
    }

    static PolarizationStateT maximally_mixed() {
        return PolarizationStateT(Matrix::Identity() / Scalar(2));
    }

    const Matrix& matrix() const { return rho_; }

    Scalar purity() const { return (rho_ * rho_).trace().real(); }

    bool is_pure(Scalar tol = Scalar(1e-9)) const { return purity() > Scalar(1) - tol; }

    /// Bloch vector (<X>, <Y>, <Z>).
    Eigen::Matrix<Scalar, 3, 1> bloch() const {
        const auto& p = pauli_basis<Scalar>();
        Eigen::Matrix<Scalar, 3, 1> b;
        for (int k = 0; k < 3; ++k) b[k] = (rho_ * p[k + 1]).trace().real();
        return b;
    }

   private:
    explicit PolarizationStateT(const Matrix& rho) : rho_(rho) {}
    Matrix rho_;
};

using PolarizationState = PolarizationStateT<double>;

template <typename Scalar = double>
PolarizationStateT<Scalar> standard_state(Label l) {
    return PolarizationStateT<Scalar>::pure(standard_ket<Scalar>(l));
}

/// One PBS output port set to pass polarization `label`.
template <typename Scalar = double>
struct AnalysisSettingT {
    Label label;
    Matrix2c<Scalar> projector;

    static AnalysisSettingT of(Label l) {
        const auto k = standard_ket<Scalar>(l);
        return {l, k * k.adjoint()};
    }
};

using AnalysisSetting = AnalysisSettingT<double>;

template <typename Scalar>
Scalar expectation(const PolarizationStateT<Scalar>& rho, const AnalysisSettingT<Scalar>& setting) {
    return (rho.matrix() * setting.projector).trace().real();
}

/// Uhlmann fidelity. For qubits F = tr(rho sigma) + 2 sqrt(det rho det sigma),
/// which reduces to <psi|rho|psi> when either argument is pure.
template <typename Scalar>
Scalar fidelity(const PolarizationStateT<Scalar>& rho, const PolarizationStateT<Scalar>& target) {
    const Scalar overlap = (rho.matrix() * target.matrix()).trace().real();
    if (target.is_pure() || rho.is_pure()) return std::clamp(overlap, Scalar(0), Scalar(1));
    const Scalar d1 = std::max(Scalar(0), rho.matrix().determinant().real());
    const Scalar d2 = std::max(Scalar(0), target.matrix().determinant().real());
    return std::clamp(overlap + Scalar(2) * std::sqrt(d1 * d2), Scalar(0), Scalar(1));
}

template <typename Scalar>
Scalar trace_distance(const Matrix2c<Scalar>& a, const Matrix2c<Scalar>& b) {
    const Matrix2c<Scalar> d = a - b;
    Eigen::SelfAdjointEigenSolver<Matrix2c<Scalar>> es((d + d.adjoint()) / Scalar(2),
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum() / Scalar(2);
}

template <typename Scalar>
Scalar trace_distance(const PolarizationStateT<Scalar>& a, const PolarizationStateT<Scalar>& b) {
    return trace_distance<Scalar>(a.matrix(), b.matrix());
}

/// Coefficients r_k = tr(rho sigma_k), so that rho = 1/2 sum_k r_k sigma_k.
template <typename Derived>
Eigen::Matrix<typename Derived::RealScalar, 4, 1> pauli_components(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::RealScalar;
    const auto& p = pauli_basis<Scalar>();
    Eigen::Matrix<Scalar, 4, 1> r;
    for (int k = 0; k < 4; ++k) r[k] = (m * p[k]).trace().real();
    return r;
}

template <typename Scalar>
Matrix2c<Scalar> from_pauli_components(const Eigen::Matrix<Scalar, 4, 1>& r) {
    const auto& p = pauli_basis<Scalar>();
    Matrix2c<Scalar> m = Matrix2c<Scalar>::Zero();
    for (int k = 0; k < 4; ++k) m += std::complex<Scalar>(r[k] / Scalar(2)) * p[k];
    return m;
}

}  // namespace afcmem

#endif
