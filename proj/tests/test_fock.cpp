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

#include <doctest.h>

#include <limits>
#include <random>

#include "sqf/fock_engine.hpp"
#include "test_support.hpp"

using namespace sqf;
using sqf::testing::kPi;
using sqf::testing::rel_err;

namespace {

// Values from an independent multiprecision evaluation of the closed forms.
constexpr double kInvCosh06 = 0.843550687621807;
constexpr double kP0At06 = 0.711577762587223;
constexpr double kXAt06 = 0.288422237412777;
constexpr double kNHNVAt06 = 0.733909008079189;
constexpr double kTwoN2At06 = 0.328581224417002;

Eigen::Matrix2cd pbs_map(double phi)
{
    const cplx is(0.0, std::sin(phi / 2));
    Eigen::Matrix2cd u;
    u << std::cos(phi / 2), is, is, std::cos(phi / 2);
    return u;
}

Eigen::Matrix2cd hadamard()
{
    const double r = std::sqrt(0.5);
    Eigen::Matrix2cd b;
    b << r, r, r, -r;
    return b;
}

Eigen::Matrix2cd random_unitary(std::mt19937_64 &rng)
{
    std::normal_distribution<double> n;
    Eigen::Matrix2cd z;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            z(i, j) = cplx(n(rng), n(rng));
    Eigen::HouseholderQR<Eigen::Matrix2cd> qr(z);
    Eigen::Matrix2cd q = qr.householderQ();
    Eigen::Matrix2cd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < 2; ++i)
        q.col(i) *= r(i, i) / std::abs(r(i, i));
    return q;
}

DenseFockState fock_state(int cutoff, std::initializer_list<std::tuple<int, int, cplx>> entries)
{
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
    for (const auto &[h, v, amp] : entries)
        a(h, v) = amp;
    const double deficit = 1.0 - a.squaredNorm();
    return DenseFockState(a, deficit);
}

std::vector<double> total_number_distribution(const DenseFockState &s)
{
    const Eigen::MatrixXd pmf = joint_photon_pmf(s);
    std::vector<double> dist(static_cast<size_t>(2 * s.cutoff() + 1), 0.0);
    for (int h = 0; h <= s.cutoff(); ++h)
        for (int v = 0; v <= s.cutoff(); ++v)
            dist[static_cast<size_t>(h + v)] += pmf(h, v);
    return dist;
}

} // namespace

TEST_CASE("opa params derive from the gain")
{
    const auto p = OpaParams::from_gain(0.6);
    CHECK(p.gamma == doctest::Approx(std::tanh(0.6)).epsilon(1e-15));
    CHECK(p.c_norm == doctest::Approx(std::cosh(0.6)).epsilon(1e-15));
    CHECK(rel_err(p.pair_ratio(), p.n_bar / (p.n_bar + 1.0)) < 1e-14);
    CHECK_THROWS_AS(OpaParams::from_gain(-0.1), InvalidInput);
    CHECK_THROWS_AS(OpaParams::from_gain(std::numeric_limits<double>::quiet_NaN()), InvalidInput);
}

TEST_CASE("tmsv at zero gain is the vacuum")
{
    const auto s = build_tmsv_dense(OpaParams::from_gain(0.0), 4);
    CHECK(s.amplitude(0, 0) == cplx(1.0));
    for (int h = 0; h <= 4; ++h)
        for (int v = 0; v <= 4; ++v)
            if (h || v)
                CHECK(s.amplitude(h, v) == cplx(0.0));
    CHECK(s.norm_deficit() == 0.0);
}

TEST_CASE("tmsv coefficients follow the geometric law")
{
    const auto params = OpaParams::from_gain(0.6);
    const auto s = build_tmsv_dense(params, 30);
    CHECK(rel_err(s.amplitude(0, 0).real(), kInvCosh06) < 1e-14);
    const Eigen::MatrixXd pmf = joint_photon_pmf(s);
    CHECK(rel_err(pmf(0, 0), kP0At06) < 1e-14);
    for (int n = 1; n <= 30; ++n)
        CHECK(rel_err(pmf(n, n) / pmf(n - 1, n - 1), kXAt06) < 1e-12);
    for (int h = 0; h <= 30; ++h)
        for (int v = 0; v <= 30; ++v)
            if (h != v)
                CHECK(s.amplitude(h, v) == cplx(0.0));
    CHECK(rel_err(s.norm_deficit(), std::pow(kXAt06, 31)) < 1e-10);
    CHECK(std::abs(s.norm_deficit() - (1.0 - s.stored_norm())) < 1e-12);
}

TEST_CASE("tmsv construction errors")
{
    CHECK_THROWS_AS(build_tmsv_dense(OpaParams::from_gain(1.4), 10), TruncationError);
    CHECK_THROWS_AS(build_tmsv_dense(OpaParams::from_gain(0.6), -1), InvalidInput);
    OpaParams bad;
    bad.g = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(build_tmsv_dense(bad, 10), InvalidInput);
    try {
        build_tmsv_dense(OpaParams::from_gain(1.4), 10);
    } catch (const TruncationError &e) {
        CHECK(std::string(e.what()).find("truncation insufficient") != std::string::npos);
    }
}

TEST_CASE("dense state invariants are enforced")
{
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
    a(0, 0) = 1.1;
    CHECK_THROWS_AS(DenseFockState(a, 0.0), InvalidInput);
    a(0, 0) = 0.5;
    CHECK_THROWS_AS(DenseFockState(a, 0.0), InvalidInput);
    CHECK_NOTHROW(DenseFockState(a, 0.75));
}

TEST_CASE("identity unitary leaves amplitudes unchanged")
{
    const auto s = build_tmsv_dense(OpaParams::from_gain(0.5), 40);
    const auto t = apply_mode_unitary(s, Eigen::Matrix2cd::Identity());
    for (int h = 0; h <= s.cutoff(); ++h)
        for (int v = 0; v <= s.cutoff(); ++v)
            CHECK(std::abs(t.amplitude(h, v) - s.amplitude(h, v)) < 1e-13);
}

TEST_CASE("hong-ou-mandel null")
{
    const auto one_one = fock_state(2, {{1, 1, cplx(1.0)}});
    const auto out = apply_mode_unitary(one_one, pbs_map(kPi / 2));
    const Eigen::MatrixXd pmf = joint_photon_pmf(out);
    CHECK(pmf(1, 1) < 1e-24);
    CHECK(std::abs(pmf(2, 0) - 0.5) < 1e-12);
    CHECK(std::abs(pmf(0, 2) - 0.5) < 1e-12);

    for (double phi : {0.0, 0.3, 1.1, 2.0, 2.9}) {
        const auto o = apply_mode_unitary(one_one, pbs_map(phi));
        CHECK(std::abs(joint_photon_pmf(o)(1, 1) - std::pow(std::cos(phi), 2)) < 1e-12);
    }
}

TEST_CASE("tmsv in the diagonal basis has even support only")
{
    const auto s = build_tmsv_dense(OpaParams::from_gain(0.5), 40);
    const auto pm = apply_mode_unitary(s, hadamard());
    for (int a = 0; a <= pm.cutoff(); ++a)
        for (int b = 0; b <= pm.cutoff(); ++b)
            if (a % 2 || b % 2)
                CHECK(std::abs(pm.amplitude(a, b)) < 1e-12);
}

TEST_CASE("passive unitaries preserve the total photon distribution")
{
    std::mt19937_64 rng(7);
    const auto s = build_tmsv_dense(OpaParams::from_gain(0.7), 40);
    const auto before = total_number_distribution(s);
    for (int trial = 0; trial < 8; ++trial) {
        const auto t = apply_mode_unitary(s, random_unitary(rng));
        const auto after = total_number_distribution(t);
        for (size_t n = 0; n < before.size(); ++n)
            CHECK(std::abs(after[n] - before[n]) < 1e-12);
        CHECK(std::abs(joint_photon_pmf(t).sum() - joint_photon_pmf(s).sum()) < 1e-12);
        CHECK(std::abs(t.norm_deficit() - s.norm_deficit()) < 1e-12);
    }
}

TEST_CASE("unitary composition")
{
    std::mt19937_64 rng(11);
    const auto s = build_tmsv_dense(OpaParams::from_gain(0.6), 36);
    for (int trial = 0; trial < 6; ++trial) {
        const Eigen::Matrix2cd u1 = random_unitary(rng);
        const Eigen::Matrix2cd u2 = random_unitary(rng);
        const auto seq = apply_mode_unitary(apply_mode_unitary(s, u1), u2);
        const auto once = apply_mode_unitary(s, u2 * u1);
        const int c = std::min(seq.cutoff(), once.cutoff());
        double worst = 0.0;
        for (int h = 0; h <= c; ++h)
            for (int v = 0; v <= c; ++v)
                worst = std::max(worst, std::abs(seq.amplitude(h, v) - once.amplitude(h, v)));
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("sector unitary matches single-photon mode map")
{
    std::mt19937_64 rng(3);
    const Eigen::Matrix2cd u = random_unitary(rng);
    const Eigen::MatrixXcd s1 = sector_unitary(1, u);
    // Basis |k, 1-k>: index 0 = photon in mode V, index 1 = photon in mode H.
    const Eigen::MatrixXcd unit = s1.adjoint() * s1;
    CHECK((unit - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-12);
    for (int n : {0, 3, 10, 25}) {
        const Eigen::MatrixXcd m = sector_unitary(n, u);
        CHECK((m.adjoint() * m - Eigen::MatrixXcd::Identity(n + 1, n + 1)).norm() < 1e-10);
    }
}

TEST_CASE("non-unitary maps are rejected")
{
    const auto s = build_tmsv_dense(OpaParams::from_gain(0.3), 20);
    Eigen::Matrix2cd m;
    m << 1.0, 0.1, 0.0, 1.0;
    CHECK_THROWS_AS(apply_mode_unitary(s, m), InvalidInput);
    CHECK_THROWS_AS(sector_unitary(3, m), InvalidInput);
}

TEST_CASE("normal-ordered moments of the tmsv")
{
    const auto params = OpaParams::from_gain(0.6);
    const int cutoff = required_cutoff(params, 4, 1e-14);
    const auto s = build_tmsv_dense(params, cutoff);
    CHECK(rel_err(normal_moment_dense(s, 1, 1, 1, 1).real(), kNHNVAt06) < 1e-12);
    CHECK(rel_err(normal_moment_dense(s, 2, 0, 2, 0).real(), kTwoN2At06) < 1e-12);
    CHECK(rel_err(normal_moment_dense(s, 1, 0, 1, 0).real(), params.n_bar) < 1e-12);
    for (auto [p, q] : {std::pair{1, 0}, {0, 2}, {2, 1}, {2, 2}})
        CHECK(std::abs(normal_moment_dense(s, p, q, p, q).imag()) < 1e-12);
    // Phase covariance: unequal creator/annihilator counts vanish.
    CHECK(std::abs(normal_moment_dense(s, 1, 0, 0, 0)) < 1e-15);
    CHECK(std::abs(normal_moment_dense(s, 2, 0, 1, 0)) < 1e-15);
    CHECK_THROWS_AS(normal_moment_dense(s, 3, 2, 2, 2), InvalidInput);
}

TEST_CASE("vacuum moments vanish")
{
    const auto v = DenseFockState::vacuum(3);
    CHECK(normal_moment_dense(v, 1, 0, 1, 0) == cplx(0.0));
    CHECK(normal_moment_dense(v, 0, 1, 0, 1) == cplx(0.0));
    CHECK(normal_moment_dense(v, 2, 2, 2, 2) == cplx(0.0));
    CHECK(normal_moment_dense(v, 0, 0, 0, 0) == cplx(1.0));
    const Eigen::MatrixXd pmf = joint_photon_pmf(v);
    CHECK(pmf(0, 0) == 1.0);
    CHECK(pmf.sum() == 1.0);
}

TEST_CASE("joint pmf of the tmsv")
{
    const auto s = build_tmsv_dense(OpaParams::from_gain(0.6), 30);
    const Eigen::MatrixXd pmf = joint_photon_pmf(s);
    for (int n = 0; n <= 30; ++n)
        CHECK(rel_err(pmf(n, n), (1.0 - kXAt06) * std::pow(kXAt06, n)) < 1e-12);
    CHECK(std::abs(pmf.sum() - (1.0 - s.norm_deficit())) < 1e-12);
}

TEST_CASE("truncation rule")
{
    const auto p = OpaParams::from_gain(0.8);
    const int c0 = required_cutoff(p, 0, 1e-12);
    CHECK(truncation_tail(p, 0, c0) <= 1e-12);
    CHECK(truncation_tail(p, 0, c0 - 1) > 1e-12);
    const int c6 = required_cutoff(p, 6, 1e-12);
    CHECK(c6 > c0);
    CHECK(truncation_tail(p, 6, c6) <= 1e-12);
    CHECK(rel_err(truncation_tail(p, 0, 10), std::pow(p.pair_ratio(), 11)) < 1e-12);
    CHECK_THROWS_AS(required_cutoff(OpaParams::from_gain(6.0), 6, 1e-12), TruncationError);
}

TEST_CASE("coherent dense state")
{
    const auto s = build_coherent_dense(cplx(0.8, 0.3), false, 30);
    CHECK(std::abs(normal_moment_dense(s, 1, 0, 1, 0).real() - std::norm(cplx(0.8, 0.3))) < 1e-12);
    CHECK(std::abs(normal_moment_dense(s, 0, 0, 1, 0) - cplx(0.8, 0.3)) < 1e-12);
    CHECK(std::abs(normal_moment_dense(s, 0, 1, 0, 1)) < 1e-15);
    const auto v = build_coherent_dense(cplx(0.5, 0.0), true, 20);
    CHECK(std::abs(normal_moment_dense(v, 0, 1, 0, 1).real() - 0.25) < 1e-12);
}
