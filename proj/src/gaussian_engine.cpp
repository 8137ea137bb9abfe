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

#include "sqf/gaussian_engine.hpp"

#include <cmath>
#include <cstdint>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sqf/fock_engine.hpp"

namespace sqf {

namespace {

void require_mode(const GaussianState &state, int i)
{
    if (i < 0 || i >= state.mode_count())
        throw InvalidInput("mode index out of range");
}

// da -> A da + B da^dag applied to the whole state.
GaussianState bogoliubov(const GaussianState &state, const Eigen::MatrixXcd &a,
                         const Eigen::MatrixXcd &b)
{
    const int m = state.mode_count();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m, m);
    const Eigen::MatrixXcd &n = state.n_mat();
    const Eigen::MatrixXcd &mm = state.m_mat();
    const Eigen::MatrixXcd anti = id + n.transpose(); // <da_i da_j^dag>

    Eigen::VectorXcd mean = a * state.mean() + b * state.mean().conjugate();
    Eigen::MatrixXcd n_out = a.conjugate() * n * a.transpose() +
                             a.conjugate() * mm.conjugate() * b.transpose() +
                             b.conjugate() * mm * a.transpose() +
                             b.conjugate() * anti * b.transpose();
    Eigen::MatrixXcd m_out = a * mm * a.transpose() + a * anti * b.transpose() +
                             b * n * a.transpose() + b * mm.conjugate() * b.transpose();
    n_out = 0.5 * (n_out + n_out.adjoint()).eval();
    m_out = 0.5 * (m_out + m_out.transpose()).eval();
    return GaussianState(std::move(mean), std::move(n_out), std::move(m_out), state.labels());
}

struct WickOp {
    int mode;
    bool creator;
};

class WickExpansion {
public:
    WickExpansion(const GaussianState &state, std::vector<WickOp> ops)
        : state_(state), ops_(std::move(ops))
    {
    }

    cplx evaluate() { return expand(0); }

private:
    cplx singleton(const WickOp &op) const
    {
        const cplx mu = state_.mean()(op.mode);
        return op.creator ? std::conj(mu) : mu;
    }

    // Operators are in normal order, so an annihilator never precedes a creator.
    cplx contraction(const WickOp &first, const WickOp &second) const
    {
        if (first.creator && second.creator)
            return std::conj(state_.m_mat()(first.mode, second.mode));
        if (first.creator)
            return state_.n_mat()(first.mode, second.mode);
        return state_.m_mat()(first.mode, second.mode);
    }

    cplx expand(std::uint32_t used)
    {
        const int count = static_cast<int>(ops_.size());
        int first = 0;
        while (first < count && (used & (1u << first)))
            ++first;
        if (first == count)
            return 1.0;

        cplx total = 0.0;
        const std::uint32_t with_first = used | (1u << first);
        const cplx s = singleton(ops_[first]);
        if (s != cplx(0.0))
            total += s * expand(with_first);
        for (int k = first + 1; k < count; ++k) {
            if (used & (1u << k))
                continue;
            const cplx c = contraction(ops_[first], ops_[k]);
            if (c != cplx(0.0))
                total += c * expand(with_first | (1u << k));
        }
        return total;
    }

    const GaussianState &state_;
    std::vector<WickOp> ops_;
};

} // namespace

GaussianState::GaussianState(Eigen::VectorXcd mean, Eigen::MatrixXcd n_mat,
                             Eigen::MatrixXcd m_mat, std::vector<ModeLabel> labels)
    : mean_(std::move(mean)), n_mat_(std::move(n_mat)), m_mat_(std::move(m_mat)),
      labels_(std::move(labels))
{
    const auto m = mean_.size();
    if (m < 1)
        throw InvalidInput("Gaussian state needs at least one mode");
    if (n_mat_.rows() != m || n_mat_.cols() != m || m_mat_.rows() != m || m_mat_.cols() != m)
        throw InvalidInput("moment matrices must be m x m");
    if (labels_.empty())
        labels_.assign(static_cast<size_t>(m), ModeLabel{});
    if (static_cast<Eigen::Index>(labels_.size()) != m)
        throw InvalidInput("one label per mode required");
}

GaussianState GaussianState::with_label(int i, ModeLabel label) const
{
    require_mode(*this, i);
    GaussianState copy = *this;
    copy.labels_[static_cast<size_t>(i)] = label;
    return copy;
}

double GaussianState::physicality_margin() const
{
    const auto m = mode_count();
    Eigen::MatrixXcd big(2 * m, 2 * m);
    big.topLeftCorner(m, m) = n_mat_ + Eigen::MatrixXcd::Identity(m, m);
    big.topRightCorner(m, m) = m_mat_.conjugate();
    big.bottomLeftCorner(m, m) = m_mat_;
    big.bottomRightCorner(m, m) = n_mat_.conjugate();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(big, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double GaussianState::total_photons() const
{
    return n_mat_.diagonal().real().sum() + mean_.squaredNorm();
}

GaussianState gaussian_vacuum(int m, std::vector<ModeLabel> labels)
{
    if (m < 1)
        throw InvalidInput("mode count must be >= 1");
    return GaussianState(Eigen::VectorXcd::Zero(m), Eigen::MatrixXcd::Zero(m, m),
                         Eigen::MatrixXcd::Zero(m, m), std::move(labels));
}

GaussianState apply_two_mode_squeeze(const GaussianState &state, int i, int j, double g)
{
    require_mode(state, i);
    require_mode(state, j);
    if (i == j)
        throw InvalidInput("two-mode squeezing needs distinct modes");
    if (!std::isfinite(g))
        throw InvalidInput("gain must be finite");
    const int m = state.mode_count();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(m, m);
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(m, m);
    a(i, i) = a(j, j) = std::cosh(g);
    b(i, j) = b(j, i) = std::sinh(g);
    return bogoliubov(state, a, b);
}

GaussianState apply_passive_unitary(const GaussianState &state, std::span<const int> modes,
                                    const Eigen::MatrixXcd &u)
{
    if (static_cast<Eigen::Index>(modes.size()) != u.rows())
        throw InvalidInput("unitary size does not match mode subset");
    require_unitary(u, 1e-12);
    for (size_t r = 0; r < modes.size(); ++r) {
        require_mode(state, modes[r]);
        for (size_t c = 0; c < r; ++c)
            if (modes[c] == modes[r])
                throw InvalidInput("mode subset must not repeat indices");
    }

    const int m = state.mode_count();
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(m, m);
    for (size_t r = 0; r < modes.size(); ++r) {
        for (size_t c = 0; c < modes.size(); ++c)
            full(modes[r], modes[c]) = u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    return bogoliubov(state, full, Eigen::MatrixXcd::Zero(m, m));
}

GaussianState apply_passive_unitary(const GaussianState &state, const Eigen::MatrixXcd &u)
{
    std::vector<int> all(static_cast<size_t>(state.mode_count()));
    for (size_t i = 0; i < all.size(); ++i)
        all[i] = static_cast<int>(i);
    return apply_passive_unitary(state, all, u);
}

GaussianState apply_displacement(const GaussianState &state, int i, cplx alpha)
{
    require_mode(state, i);
    Eigen::VectorXcd mean = state.mean();
    mean(i) += alpha;
    return GaussianState(std::move(mean), state.n_mat(), state.m_mat(), state.labels());
}

GaussianState apply_loss(const GaussianState &state, int i, double eta)
{
    require_mode(state, i);
    if (!(eta >= 0.0 && eta <= 1.0))
        throw InvalidInput("transmissivity must lie in [0, 1]");
    const double t = std::sqrt(eta);
    Eigen::VectorXcd mean = state.mean();
    Eigen::MatrixXcd n = state.n_mat();
    Eigen::MatrixXcd mm = state.m_mat();
    mean(i) *= t;
    n.row(i) *= t;
    n.col(i) *= t;
    mm.row(i) *= t;
    mm.col(i) *= t;
    return GaussianState(std::move(mean), std::move(n), std::move(mm), state.labels());
}

GaussianState split_temporal_mode(const GaussianState &state, int i, double overlap)
{
    require_mode(state, i);
    if (!(overlap >= 0.0 && overlap <= 1.0))
        throw InvalidInput("overlap must lie in [0, 1]");

    const int m = state.mode_count();
    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(m + 1);
    Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(m + 1, m + 1);
    Eigen::MatrixXcd mm = Eigen::MatrixXcd::Zero(m + 1, m + 1);
    mean.head(m) = state.mean();
    n.topLeftCorner(m, m) = state.n_mat();
    mm.topLeftCorner(m, m) = state.m_mat();
    std::vector<ModeLabel> labels = state.labels();
    labels.push_back(ModeLabel{state.label(i).pol, 1});

    GaussianState extended(std::move(mean), std::move(n), std::move(mm), std::move(labels));
    if (overlap == 1.0)
        return extended;

    const double keep = std::sqrt(overlap);
    const double leak = std::sqrt(1.0 - overlap);
    Eigen::Matrix2cd rot;
    rot << keep, leak, -leak, keep;
    const int pair[2] = {i, m};
    return apply_passive_unitary(extended, pair, rot);
}

cplx wick_normal_moment(const GaussianState &state, std::span<const int> creators,
                        std::span<const int> annihilators)
{
    if (creators.size() + annihilators.size() > static_cast<size_t>(kMaxWickOrder))
        throw InvalidInput("Wick moment order above 8 is not supported");
    std::vector<WickOp> ops;
    ops.reserve(creators.size() + annihilators.size());
    for (int c : creators) {
        require_mode(state, c);
        ops.push_back({c, true});
    }
    for (int a : annihilators) {
        require_mode(state, a);
        ops.push_back({a, false});
    }
    return WickExpansion(state, std::move(ops)).evaluate();
}

double vacuum_probability(const GaussianState &state, std::span<const int> modes)
{
    const auto s = static_cast<Eigen::Index>(modes.size());
    if (s == 0)
        return 1.0;
    for (int i : modes)
        require_mode(state, i);

    // Anti-normally ordered covariance of (a_S, a_S^dag); the Husimi function
    // at the origin gives the vacuum projection.
    Eigen::MatrixXcd q(2 * s, 2 * s);
    Eigen::VectorXcd xi(2 * s);
    for (Eigen::Index r = 0; r < s; ++r) {
        const int mr = modes[static_cast<size_t>(r)];
        xi(r) = state.mean()(mr);
        xi(r + s) = std::conj(state.mean()(mr));
        for (Eigen::Index c = 0; c < s; ++c) {
            const int mc = modes[static_cast<size_t>(c)];
            const cplx delta = (r == c) ? 1.0 : 0.0;
            q(r, c) = delta + state.n_mat()(mc, mr);
            q(r, c + s) = state.m_mat()(mr, mc);
            q(r + s, c) = std::conj(state.m_mat()(mr, mc));
            q(r + s, c + s) = delta + state.n_mat()(mr, mc);
        }
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(q);
    if (llt.info() != Eigen::Success)
        throw NumericalError("covariance is not positive definite");
    double log_det = 0.0;
    for (Eigen::Index k = 0; k < 2 * s; ++k)
        log_det += 2.0 * std::log(llt.matrixL()(k, k).real());
    const double quad = xi.dot(llt.solve(xi)).real();
    return std::exp(-0.5 * quad - 0.5 * log_det);
}

} // namespace sqf
