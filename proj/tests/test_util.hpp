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

#ifndef AFCMEM_TESTS_TEST_UTIL_HPP
#define AFCMEM_TESTS_TEST_UTIL_HPP

#include <random>
#include <vector>

#include "afcmem/polarization.hpp"

namespace afcmem::test {

inline Vector2c<double> random_ket(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Vector2c<double> k;
    k << std::complex<double>(n(rng), n(rng)), std::complex<double>(n(rng), n(rng));
    return k.normalized();
}

/// Ginibre-distributed full-rank state.
inline PolarizationState random_state(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Matrix2c<double> g;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = {n(rng), n(rng)};
    Matrix2c<double> rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = (rho + rho.adjoint()) / 2.0;
    return PolarizationState::from_matrix(rho);
}

/// Random CPTP channel as `count` Kraus operators normalized by S^{-1/2}.
inline std::vector<Matrix2c<double>> random_kraus(std::mt19937_64& rng, int count) {
    std::normal_distribution<double> n;
    std::vector<Matrix2c<double>> ks(static_cast<std::size_t>(count));
    Matrix2c<double> s = Matrix2c<double>::Zero();
    for (auto& k : ks) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) k(i, j) = {n(rng), n(rng)};
        s += k.adjoint() * k;
    }
    Eigen::SelfAdjointEigenSolver<Matrix2c<double>> es(s);
    const Matrix2c<double> inv_sqrt = es.operatorInverseSqrt();
    for (auto& k : ks) k = k * inv_sqrt;
    return ks;
}

}  // namespace afcmem::test

#endif
