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
#include <limits>
#include <ostream>
#include <random>

#include "afcmem/csv.hpp"
#include "afcmem/errors.hpp"
#include "afcmem/rng.hpp"

namespace afcmem {

namespace {

using C = std::complex<double>;
using Params = Eigen::Vector4d;

struct Setting {
    Matrix2c<double> projector;
    double count, exposure, background;
};

std::vector<Setting> settings_of(const TomographyData& data) {
    std::vector<Setting> s;
    for (const auto& [label, e] : data.entries)
        s.push_back({AnalysisSetting::of(label).projector, e.count, e.exposure, e.background});
    return s;
}

// T = [[t0, 0], [t2 + i t3, t1]]; dT/dt_k are constant.
Matrix2c<double> lower_triangular(const Params& t) {
    Matrix2c<double> m;
    m << C(t[0]), C(0), C(t[2], t[3]), C(t[1]);
    return m;
}

const std::array<Matrix2c<double>, 4>& t_derivatives() {
    static const std::array<Matrix2c<double>, 4> d = [] {
        std::array<Matrix2c<double>, 4> e;
        for (int k = 0; k < 4; ++k) {
            Params u = Params::Zero();
            u[k] = 1.0;
            e[static_cast<std::size_t>(k)] = lower_triangular(u);
        }
        return e;
    }();
    return d;
}

struct Likelihood {
    const std::vector<Setting>& settings;

    // Returns -inf when a setting with counts has zero expected rate.
    double value(const Params& t) const {
        const Matrix2c<double> tm = lower_triangular(t);
        const Matrix2c<double> m = tm.adjoint() * tm;
        double ll = 0.0;
        for (const auto& s : settings) {
            const double lambda = s.exposure * (m * s.projector).trace().real() + s.background;
            if (s.count > 0.0) {
                if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
                ll += s.count * std::log(lambda);
            }
            ll -= lambda;
        }
        return ll;
    }

    void derivatives(const Params& t, Params& grad, Eigen::Matrix4d& hess) const {
        const Matrix2c<double> tm = lower_triangular(t);
        const Matrix2c<double> m = tm.adjoint() * tm;
        const auto& e = t_derivatives();
        grad.setZero();
        hess.setZero();
        for (const auto& s : settings) {
            const double lambda = s.exposure * (m * s.projector).trace().real() + s.background;
            Params g;
            Eigen::Matrix4d h;
            for (std::size_t a = 0; a < 4; ++a) {
                g[static_cast<int>(a)] = 2.0 * (s.projector * tm.adjoint() * e[a]).trace().real();
                for (std::size_t b = 0; b < 4; ++b)
                    h(static_cast<int>(a), static_cast<int>(b)) = 2.0 * (e[a].adjoint() * e[b] * s.projector).trace().real();
            }
            g *= s.exposure;
            h *= s.exposure;
            const double ratio = lambda > 0.0 ? s.count / lambda : 0.0;
            grad += (ratio - 1.0) * g;
            hess += (ratio - 1.0) * h;
            if (lambda > 0.0) hess -= (s.count / (lambda * lambda)) * g * g.transpose();
        }
    }
};

PolarizationState normalized_state(const Params& t) {
    const Matrix2c<double> tm = lower_triangular(t);
    Matrix2c<double> m = tm.adjoint() * tm;
    m /= m.trace().real();
    m = (m + m.adjoint()) / 2.0;
    return PolarizationState::from_matrix(m);
}

// Column (k, l) -> index 4k + l of the vectorized chi.
Eigen::Matrix<C, 4, 16> tp_constraint() {
    const auto& p = pauli_basis<double>();
    Eigen::Matrix<C, 4, 16> m;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
            const Matrix2c<double> prod = p[static_cast<std::size_t>(l)].adjoint() * p[static_cast<std::size_t>(k)];
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) m(2 * a + b, 4 * k + l) = prod(a, b);
        }
    return m;
}

Eigen::Matrix<C, 16, 1> vec(const ChiMatrix& chi) {
    Eigen::Matrix<C, 16, 1> v;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) v[4 * k + l] = chi(k, l);
    return v;
}

ChiMatrix unvec(const Eigen::Matrix<C, 16, 1>& v) {
    ChiMatrix chi;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) chi(k, l) = v[4 * k + l];
    return chi;
}

ChiMatrix project_tp(const ChiMatrix& chi) {
    static const Eigen::Matrix<C, 4, 16> m = tp_constraint();
    static const Eigen::Matrix<C, 4, 4> gram_inv = (m * m.adjoint()).inverse();
    Eigen::Matrix<C, 4, 1> target;
    target << C(1), C(0), C(0), C(1);
    const Eigen::Matrix<C, 16, 1> v = vec(chi);
    const Eigen::Matrix<C, 16, 1> out = v - m.adjoint() * (gram_inv * (m * v - target));
    ChiMatrix r = unvec(out);
    return (r + r.adjoint()) / 2.0;
}

ChiMatrix project_psd(const ChiMatrix& chi) {
    Eigen::SelfAdjointEigenSolver<ChiMatrix> es((chi + chi.adjoint()) / 2.0);
    const Eigen::Vector4d w = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * w.cast<C>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double TomographyData::total_counts() const {
    double n = 0.0;
    for (const auto& [label, e] : entries) n += e.count;
    return n;
}

void TomographyData::validate() const {
    Eigen::Matrix<double, Eigen::Dynamic, 4> rows(static_cast<Eigen::Index>(entries.size()), 4);
    Eigen::Index i = 0;
    for (const auto& [label, e] : entries) {
        if (!(e.count >= 0.0)) throw InputError("negative count");
        if (!(e.exposure > 0.0)) throw InputError("exposure must be positive");
        if (!(e.background >= 0.0)) throw InputError("background must be nonnegative");
        rows.row(i++) = pauli_components(AnalysisSetting::of(label).projector).transpose();
    }
    if (entries.size() < 4 || Eigen::FullPivLU<Eigen::MatrixXd>(rows).rank() < 4)
        throw InputError("at least four linearly independent analyzer settings are required");
}

DensityMatrixEstimate mle_state(const TomographyData& data, const MleOptions& options) {
    data.validate();
    const double total = data.total_counts();
    if (!(total > 0.0)) throw EstimationError("tomography data carry no counts");

    const auto settings = settings_of(data);
    const Likelihood lik{settings};

    double exposure = 0.0, background = 0.0;
    for (const auto& s : settings) {
        exposure += s.exposure;
        background += s.background;
    }
    // Start from the maximally mixed state at the intensity matching the total counts.
    const double scale = std::max(total - background, 1e-3 * total) / exposure;
    Params t(std::sqrt(scale), std::sqrt(scale), 0.0, 0.0);
    double ll = lik.value(t);

    DensityMatrixEstimate est;
    if (options.record_history) est.history.push_back(ll);

    // Levenberg-damped Newton ascent; only improving steps are accepted.
    double damping = 1e-3;
    Params grad;
    Eigen::Matrix4d hess;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        lik.derivatives(t, grad, hess);
        const Eigen::Matrix4d neg = -hess;
        const double diag = std::max(neg.diagonal().cwiseAbs().maxCoeff(), 1e-12);
        bool accepted = false;
        while (damping < 1e20) {
            const Eigen::Matrix4d sys = neg + damping * diag * Eigen::Matrix4d::Identity();
            const Params step = sys.ldlt().solve(grad);
            const Params cand = t + step;
            const double ll_new = lik.value(cand);
            if (std::isfinite(ll_new) && ll_new > ll) {
                const double gain = ll_new - ll;
                t = cand;
                ll = ll_new;
                if (options.record_history) est.history.push_back(ll);
                damping = std::max(damping / 3.0, 1e-12);
                accepted = true;
                if (gain <= options.relative_tolerance * std::max(1.0, std::abs(ll))) est.converged = true;
                break;
            }
            damping *= 4.0;
        }
        // No improving step at any damping: stationary to machine precision.
        if (!accepted) est.converged = true;
        if (est.converged) break;
    }

    est.iterations = it + (est.converged ? 1 : 0);
    est.rho_hat = normalized_state(t);
    est.log_likelihood = ll;
    Eigen::SelfAdjointEigenSolver<Matrix2c<double>> es(est.rho_hat.matrix(), Eigen::EigenvaluesOnly);
    est.low_rank = es.eigenvalues().minCoeff() < 1e-6;
    return est;
}

StateErrors monte_carlo_errors(const TomographyData& data, int resamples, std::uint64_t seed,
                               const std::optional<PolarizationState>& target) {
    if (resamples < 100) throw InputError("at least 100 resamples are required");
    data.validate();
    if (!(data.total_counts() > 0.0)) throw EstimationError("tomography data carry no counts");

    std::vector<double> fid, pur;
    std::vector<Eigen::Vector3d> bloch;
    for (int r = 0; r < resamples; ++r) {
        std::mt19937_64 eng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        TomographyData sample = data;
        for (auto& [label, e] : sample.entries)
            e.count = e.count > 0.0 ? static_cast<double>(std::poisson_distribution<std::int64_t>(e.count)(eng)) : 0.0;
        if (!(sample.total_counts() > 0.0)) continue;
        const auto est = mle_state(sample);
        if (target) fid.push_back(fidelity(est.rho_hat, *target));
        pur.push_back(est.rho_hat.purity());
        bloch.push_back(est.rho_hat.bloch());
    }
    if (pur.size() < 2) throw EstimationError("too few usable resamples");

    auto stddev = [](const std::vector<double>& x) {
        const double n = static_cast<double>(x.size());
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= n;
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        return std::sqrt(ss / (n - 1.0));
    };

    StateErrors err;
    err.resamples = static_cast<int>(pur.size());
    if (target) err.fidelity_err = stddev(fid);
    err.purity_err = stddev(pur);
    for (int k = 0; k < 3; ++k) {
        std::vector<double> comp;
        for (const auto& b : bloch) comp.push_back(b[k]);
        err.bloch_err[k] = stddev(comp);
    }
    return err;
}

ProcessMatrix ProcessMatrix::identity() {
    ProcessMatrix p;
    p.chi(0, 0) = 1.0;
    return p;
}

ProcessMatrix ProcessMatrix::from_kraus(const std::vector<Matrix2c<double>>& kraus) {
    const auto& p = pauli_basis<double>();
    ProcessMatrix out;
    for (const auto& k : kraus) {
        Eigen::Vector4cd a;
        for (int j = 0; j < 4; ++j) a[j] = (p[static_cast<std::size_t>(j)] * k).trace() / 2.0;
        out.chi += a * a.adjoint();
    }
    return out;
}

Matrix2c<double> ProcessMatrix::tp_map() const {
    const auto& p = pauli_basis<double>();
    Matrix2c<double> m = Matrix2c<double>::Zero();
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l)
            m += chi(static_cast<int>(k), static_cast<int>(l)) * p[l].adjoint() * p[k];
    return m;
}

bool ProcessMatrix::is_hermitian(double tol) const { return (chi - chi.adjoint()).cwiseAbs().maxCoeff() <= tol; }

bool ProcessMatrix::is_trace_preserving(double tol) const {
    return (tp_map() - Matrix2c<double>::Identity()).cwiseAbs().maxCoeff() <= tol;
}

bool ProcessMatrix::is_completely_positive(double tol) const {
    Eigen::SelfAdjointEigenSolver<ChiMatrix> es((chi + chi.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

Matrix2c<double> apply_process(const ChiMatrix& chi, const Matrix2c<double>& rho_in) {
    const auto& p = pauli_basis<double>();
    Matrix2c<double> out = Matrix2c<double>::Zero();
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l) {
            const C c = chi(static_cast<int>(k), static_cast<int>(l));
            if (c != C(0)) out += c * p[k] * rho_in * p[l].adjoint();
        }
    return out;
}

ProcessOutput apply_process(const ProcessMatrix& chi, const PolarizationState& rho_in) {
    if (!chi.is_hermitian()) throw InputError("chi is not Hermitian");
    Matrix2c<double> out = apply_process(chi.chi, rho_in.matrix());
    const double tr = out.trace().real();
    if (!(tr > 0.0)) throw InputError("process output has nonpositive trace");
    const bool renorm = std::abs(tr - 1.0) > 1e-12;
    out /= tr;
    out = (out + out.adjoint()) / 2.0;
    return {PolarizationState::from_matrix(out), renorm};
}

ProcessMatrix project_cptp(const ProcessMatrix& chi, double tol, int max_iterations, int* iterations) {
    // Dykstra's algorithm converges to the nearest point of the intersection,
    // which plain alternating projections do not guarantee.
    ChiMatrix x = (chi.chi + chi.chi.adjoint()) / 2.0;
    ChiMatrix p = ChiMatrix::Zero(), q = ChiMatrix::Zero(), y = x;
    int it = 0;
    for (; it < max_iterations; ++it) {
        y = project_tp(x + p);
        p = x + p - y;
        const ChiMatrix x_next = project_psd(y + q);
        q = y + q - x_next;
        const double gap = (x_next - y).norm();
        const double moved = (x_next - x).norm();
        x = x_next;
        if (gap < tol && moved < tol) break;
    }
    if (iterations) *iterations = it + 1;
    // y is exactly TP; x is exactly PSD. They agree to `tol`.
    ProcessMatrix out;
    out.chi = project_tp(x);
    return out;
}

ProcessTomographyResult process_tomography(const std::vector<PolarizationState>& inputs,
                                           const std::vector<PolarizationState>& outputs) {
    if (inputs.size() != outputs.size()) throw InputError("inputs and outputs differ in number");
    if (inputs.size() < 4) throw InputError("process tomography needs at least four input states");

    const auto& sig = pauli_basis<double>();
    const auto rows = static_cast<Eigen::Index>(4 * inputs.size());
    Eigen::MatrixXcd b(rows, 16);
    Eigen::VectorXcd y(rows);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t l = 0; l < 4; ++l) {
                const Matrix2c<double> term = sig[k] * inputs[i].matrix() * sig[l].adjoint();
                for (int a = 0; a < 2; ++a)
                    for (int c = 0; c < 2; ++c)
                        b(static_cast<Eigen::Index>(4 * i) + 2 * a + c, static_cast<Eigen::Index>(4 * k + l)) = term(a, c);
            }
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) y(static_cast<Eigen::Index>(4 * i) + 2 * a + c) = outputs[i].matrix()(a, c);
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(b);
    cod.setThreshold(1e-10);
    if (cod.rank() < 16) throw InputError("input states do not span the qubit operator space");
    const Eigen::VectorXcd x = cod.solve(y);

    ProcessTomographyResult r;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) r.raw.chi(k, l) = x[4 * k + l];
    r.projected = project_cptp(r.raw, 1e-9, 100000, &r.projection_iterations);
    return r;
}

ProcessTomographyResult process_tomography(const std::vector<PolarizationState>& inputs,
                                           const std::vector<DensityMatrixEstimate>& outputs) {
    std::vector<PolarizationState> rho;
    rho.reserve(outputs.size());
    for (const auto& o : outputs) rho.push_back(o.rho_hat);
    return process_tomography(inputs, rho);
}

void write_chi_csv(std::ostream& os, const ProcessMatrix& chi, bool projected) {
    os << "# pauli_order=I,X,Y,Z projection_applied=" << (projected ? "yes" : "no") << '\n';
    os << "row,col,re,im\n";
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            os << k << ',' << l << ',' << fmt(chi.chi(k, l).real()) << ',' << fmt(chi.chi(k, l).imag()) << '\n';
}

}  // namespace afcmem
