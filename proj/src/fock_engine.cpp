/*
 * Copyright 2026 The sqf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sqf/fock_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace sqf {

namespace {

constexpr double kNormSlack = 1e-12;

// sqrt(n (n-1) ... (n-k+1)); zero when k > n.
double sqrt_falling(int n, int k)
{
    if (k > n)
        return 0.0;
    double v = 1.0;
    for (int i = 0; i < k; ++i)
        v *= std::sqrt(static_cast<double>(n - i));
    return v;
}

// Hermitian K with exp(iK) = u for a unitary u.
Eigen::Matrix2cd hermitian_log(const Eigen::Matrix2cd &u)
{
    Eigen::ComplexSchur<Eigen::Matrix2cd> schur(u);
    const Eigen::Matrix2cd &t = schur.matrixT();
    const Eigen::Matrix2cd &q = schur.matrixU();
    Eigen::Matrix2cd phases = Eigen::Matrix2cd::Zero();
    phases(0, 0) = std::arg(t(0, 0));
    phases(1, 1) = std::arg(t(1, 1));
    Eigen::Matrix2cd k = q * phases * q.adjoint();
    return 0.5 * (k + k.adjoint());
}

// exp(iK) restricted to the N-photon sector, kept in factored form
// gauge * Q diag(phases) Q^T * conj(gauge) with Q real orthogonal.
struct SectorRotation {
    Eigen::MatrixXd q;
    Eigen::VectorXcd phases;
    Eigen::VectorXcd gauge;

    Eigen::VectorXcd apply(const Eigen::VectorXcd &v) const
    {
        const Eigen::VectorXcd mixed = q.transpose().cast<cplx>() * gauge.conjugate().cwiseProduct(v);
        return gauge.cwiseProduct(q.cast<cplx>() * phases.cwiseProduct(mixed));
    }

    Eigen::MatrixXcd matrix() const
    {
        const Eigen::MatrixXcd qc = q.cast<cplx>();
        const Eigen::MatrixXcd real_frame = qc * phases.asDiagonal() * qc.transpose();
        return gauge.asDiagonal() * real_frame * gauge.conjugate().asDiagonal();
    }
};

SectorRotation sector_rotation(int total, const Eigen::Matrix2cd &gen)
{
    const int dim = total + 1;
    if (total == 0)
        return {Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXcd::Ones(1), Eigen::VectorXcd::Ones(1)};

    // Generator sum_ij K_ij a_i^dag a_j on |k, N-k>: diagonal K00 k + K11 (N-k),
    // first subdiagonal K01 sqrt((k+1)(N-k)). A diagonal phase gauge makes it
    // real symmetric tridiagonal.
    Eigen::VectorXd diag(dim);
    Eigen::VectorXd sub(dim - 1);
    Eigen::VectorXcd gauge(dim);
    const double k01_abs = std::abs(gen(0, 1));
    const double k01_arg = std::arg(gen(0, 1));
    gauge(0) = 1.0;
    for (int k = 0; k < dim; ++k) {
        diag(k) = gen(0, 0).real() * k + gen(1, 1).real() * (total - k);
        if (k + 1 < dim) {
            sub(k) = k01_abs * std::sqrt(static_cast<double>(k + 1) * (total - k));
            gauge(k + 1) = gauge(k) * std::polar(1.0, k01_arg);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
        throw NumericalError("sector generator diagonalization failed");

    Eigen::VectorXcd phases(dim);
    for (int i = 0; i < dim; ++i)
        phases(i) = std::polar(1.0, es.eigenvalues()(i));
    return {es.eigenvectors(), std::move(phases), std::move(gauge)};
}

} // namespace

DenseFockState::DenseFockState(Eigen::MatrixXcd amplitudes, double norm_deficit)
    : amplitudes_(std::move(amplitudes)), norm_deficit_(norm_deficit)
{
    if (amplitudes_.rows() < 1 || amplitudes_.rows() != amplitudes_.cols())
        throw InvalidInput("Fock amplitude grid must be square and non-empty");
    const double norm = amplitudes_.squaredNorm();
    if (!std::isfinite(norm) || norm > 1.0 + kNormSlack)
        throw InvalidInput("Fock amplitudes exceed unit norm");
    if (std::abs(1.0 - norm - norm_deficit_) > kNormSlack)
        throw InvalidInput("norm_deficit inconsistent with stored amplitudes");
}

DenseFockState DenseFockState::vacuum(int cutoff)
{
    if (cutoff < 0)
        throw InvalidInput("cutoff must be non-negative");
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
    amp(0, 0) = 1.0;
    return DenseFockState(std::move(amp), 0.0);
}

cplx DenseFockState::amplitude(int n_h, int n_v) const
{
    if (n_h < 0 || n_v < 0 || n_h > cutoff() || n_v > cutoff())
        return 0.0;
    return amplitudes_(n_h, n_v);
}

void require_unitary(const Eigen::MatrixXcd &u, double tol)
{
    if (u.rows() != u.cols() || u.rows() == 0)
        throw InvalidInput("unitary must be a non-empty square matrix");
    const Eigen::MatrixXcd defect =
        u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    if (!(defect.cwiseAbs().maxCoeff() <= tol))
        throw InvalidInput("matrix is not unitary within tolerance");
}

DenseFockState build_tmsv_dense(const OpaParams &params, int cutoff, double tail_tolerance)
{
    if (!std::isfinite(params.g) || params.g < 0.0)
        throw InvalidInput("gain must be finite and non-negative");
    if (cutoff < 0)
        throw InvalidInput("cutoff must be non-negative");

    const double x = params.pair_ratio();
    const double deficit = std::pow(x, cutoff + 1);
    if (deficit > tail_tolerance)
        throw TruncationError("tail " + std::to_string(deficit) + " exceeds tolerance at cutoff " +
                              std::to_string(cutoff));

    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
    double coeff = 1.0 / params.c_norm;
    for (int n = 0; n <= cutoff; ++n) {
        amp(n, n) = coeff;
        coeff *= params.gamma;
    }
    // The analytic tail is exact; 1 - stored norm agrees with it to rounding.
    return DenseFockState(std::move(amp), deficit);
}

DenseFockState build_coherent_dense(cplx alpha, bool pol_v, int cutoff, double tail_tolerance)
{
    if (cutoff < 0)
        throw InvalidInput("cutoff must be non-negative");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
        throw InvalidInput("coherent amplitude must be finite");

    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
    cplx c = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n <= cutoff; ++n) {
        if (pol_v)
            amp(0, n) = c;
        else
            amp(n, 0) = c;
        c *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    // Poisson tail summed directly; 1 - stored norm would lose it to rounding.
    const double mean = std::norm(alpha);
    double deficit = 0.0;
    double p = std::norm(c);
    for (int n = cutoff + 1; p > 0.0; ++n) {
        deficit += p;
        if (n > mean && p <= 1e-18 * deficit)
            break;
        p *= mean / (n + 1);
    }
    if (deficit > tail_tolerance)
        throw TruncationError("coherent tail " + std::to_string(deficit) +
                              " exceeds tolerance at cutoff " + std::to_string(cutoff));
    return DenseFockState(std::move(amp), deficit);
}

double truncation_tail(const OpaParams &params, int order, int cutoff)
{
    const double x = params.pair_ratio();
    if (order == 0 || x == 0.0)
        return std::pow(x, cutoff + 1);
    // Past n* = order / |ln x| the summand n^order x^n decays geometrically.
    const double peak = order / -std::log(x);
    double sum = 0.0;
    double weight = std::pow(x, cutoff + 1) * (1.0 - x);
    for (int n = cutoff + 1; weight > 0.0; ++n, weight *= x) {
        const double term = weight * std::max(1.0, std::pow(2.0 * n, order));
        sum += term;
        if (n > peak && term <= 1e-18 * sum)
            break;
    }
    return sum;
}

int required_cutoff(const OpaParams &params, int order, double tolerance)
{
    constexpr int kMaxCutoff = 4000;
    if (order < 0 || !(tolerance > 0.0))
        throw InvalidInput("order must be >= 0 and tolerance > 0");
    if (params.pair_ratio() >= 1.0)
        throw TruncationError("gain too large for a finite Fock cutoff");
    // Both tails decrease with the cutoff, so bisect.
    auto fits = [&](int c) {
        return truncation_tail(params, order, c) <= tolerance && truncation_tail(params, 0, c) <= tolerance;
    };
    int hi = kMaxCutoff;
    if (!fits(hi))
        throw TruncationError("no cutoff up to " + std::to_string(kMaxCutoff) + " meets tolerance");
    int lo = -1; // fits(lo) is false or lo is below the range
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (fits(mid) ? hi : lo) = mid;
    }
    return hi;
}

Eigen::MatrixXcd sector_unitary(int total_photons, const Eigen::Matrix2cd &u)
{
    if (total_photons < 0)
        throw InvalidInput("photon number must be non-negative");
    require_unitary(u, 1e-12);
    return sector_rotation(total_photons, hermitian_log(u)).matrix();
}

DenseFockState apply_mode_unitary(const DenseFockState &state, const Eigen::Matrix2cd &u)
{
    require_unitary(u, 1e-12);
    const Eigen::Matrix2cd gen = hermitian_log(u);
    const int cutoff = state.cutoff();
    const Eigen::MatrixXcd &in = state.amplitudes();

    int max_total = 0;
    for (int i = 0; i <= cutoff; ++i)
        for (int j = 0; j <= cutoff; ++j)
            if (in(i, j) != cplx(0.0))
                max_total = std::max(max_total, i + j);

    const int out_cutoff = std::max(cutoff, max_total);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(out_cutoff + 1, out_cutoff + 1);

    for (int total = 0; total <= max_total; ++total) {
        const int lo = std::max(0, total - cutoff);
        const int hi = std::min(total, cutoff);
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(total + 1);
        bool occupied = false;
        for (int k = lo; k <= hi; ++k) {
            v(k) = in(k, total - k);
            occupied = occupied || v(k) != cplx(0.0);
        }
        if (!occupied)
            continue;
        const Eigen::VectorXcd w = sector_rotation(total, gen).apply(v);
        for (int k = 0; k <= total; ++k)
            out(k, total - k) = w(k);
    }

    // Passive optics is norm preserving sector by sector; re-derive the
    // deficit from the rotated amplitudes so the invariant holds exactly.
    const double deficit = 1.0 - out.squaredNorm();
    if (std::abs(deficit - state.norm_deficit()) > kNormSlack)
        throw NumericalError("norm drift in passive unitary exceeds 1e-12");
    return DenseFockState(std::move(out), deficit);
}

namespace {

// a_H^r a_V^s |psi>, indexed like the input grid.
Eigen::MatrixXcd lower(const Eigen::MatrixXcd &psi, int r, int s)
{
    const int dim = static_cast<int>(psi.rows());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = r; n < dim; ++n)
        for (int m = s; m < dim; ++m)
            out(n - r, m - s) = psi(n, m) * (sqrt_falling(n, r) * sqrt_falling(m, s));
    return out;
}

} // namespace

cplx normal_moment_dense(const DenseFockState &state, int p, int q, int r, int s)
{
    if (p < 0 || q < 0 || r < 0 || s < 0)
        throw InvalidInput("moment powers must be non-negative");
    if (p + q + r + s > kMaxDenseMomentOrder)
        throw InvalidInput("moment order above 8 is outside the oracle scope");
    const Eigen::MatrixXcd &psi = state.amplitudes();
    const Eigen::MatrixXcd bra = lower(psi, p, q);
    const Eigen::MatrixXcd ket = (p == r && q == s) ? bra : lower(psi, r, s);
    // <bra|ket> summed elementwise.
    return (bra.conjugate().cwiseProduct(ket)).sum();
}

Eigen::MatrixXd joint_photon_pmf(const DenseFockState &state)
{
    return state.amplitudes().cwiseAbs2();
}

} // namespace sqf
