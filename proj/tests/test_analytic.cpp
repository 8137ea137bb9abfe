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

#include "sqf/analytic.hpp"
#include "sqf/errors.hpp"
#include "test_support.hpp"

using namespace sqf;
using sqf::testing::kPi;
using sqf::testing::rel_err;

namespace {

constexpr double kNBar14 = 3.62636420843057;
constexpr double kNBar24 = 29.879661816446;
constexpr double kNBar25 = 36.6049742623939;

constexpr FringeKind kHV{2, DetectorPairing::Same, DecoheredBasis::HV};
constexpr FringeKind kPM{2, DetectorPairing::Same, DecoheredBasis::PM};

double scan_visibility(const FringeKind &kind, double n, int points = 720)
{
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < points; ++k) {
        const double v = fringe_closed_form(kind, kPi * k / points, n);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return (hi - lo) / (hi + lo);
}

double phase_average(const FringeKind &kind, double n, int points = 64)
{
    double sum = 0.0;
    for (int k = 0; k < points; ++k)
        sum += fringe_closed_form(kind, 2 * kPi * k / points, n);
    return sum / points;
}

} // namespace

TEST_CASE("mean photon number")
{
    CHECK(mean_photons(0.0) == 0.0);
    CHECK(rel_err(mean_photons(1.4), kNBar14) < 1e-14);
    CHECK(rel_err(mean_photons(2.5), kNBar25) < 1e-14);
    CHECK_THROWS_AS(mean_photons(-1.0), InvalidInput);
}

TEST_CASE("gain from pump power")
{
    CHECK(gain_from_pump(0.0, 3.0) == 0.0);
    CHECK(gain_from_pump(4.0, 1.0) == 2.0);
    for (double kappa : {0.3, 1.0, 2.7})
        CHECK(rel_err(gain_from_pump(8.0, kappa), 2.0 * gain_from_pump(2.0, kappa)) < 1e-15);
    CHECK_THROWS_AS(gain_from_pump(-1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(gain_from_pump(1.0, 0.0), InvalidInput);
}

TEST_CASE("fringe values at the extrema")
{
    const double n = kNBar14;
    CHECK(rel_err(fringe_closed_form(kG12, 0.0, n), 2 * n * n + n) < 1e-14);
    CHECK(rel_err(fringe_closed_form(kG12, 0.0, n), 29.9273989528031) < 1e-12);
    CHECK(rel_err(fringe_closed_form(kG12, kPi / 2, n), 13.1505173721863) < 1e-12);
    CHECK(rel_err(fringe_closed_form(kG11, 0.0, n), 26.3010347443725) < 1e-12);
    CHECK(rel_err(fringe_closed_form(kG11, kPi / 2, n), 43.0779163249893) < 1e-12);
    CHECK(fringe_closed_form(kG111, kPi / 2, 1.0) == doctest::Approx(24.0).epsilon(1e-15));
    CHECK(fringe_closed_form(kG111, 0.0, 1.0) == 6.0);
    CHECK(rel_err(fringe_closed_form(kPM, 0.3, n), 28.1142168485878) < 1e-12);
}

TEST_CASE("cosine forms agree with the implementation")
{
    for (double n : {0.1, 1.0, kNBar14, kNBar25})
        for (double phi : {0.0, 0.3, 1.0, 2.0, 4.5}) {
            const double g12 = n * n + 0.5 * (n * n + n) * (1 + std::cos(2 * phi));
            const double g11 = 2 * n * n + 0.5 * (n * n + n) * (1 - std::cos(2 * phi));
            CHECK(rel_err(fringe_closed_form(kG12, phi, n), g12) < 1e-13);
            CHECK(rel_err(fringe_closed_form(kG11, phi, n), g11) < 1e-13);
        }
}

TEST_CASE("unsupported kinds are rejected")
{
    CHECK_THROWS_AS(fringe_closed_form({3, DetectorPairing::Cross, DecoheredBasis::None}, 0.0, 1.0),
                    InvalidInput);
    CHECK_THROWS_AS(fringe_closed_form({2, DetectorPairing::Cross, DecoheredBasis::HV}, 0.0, 1.0),
                    InvalidInput);
    CHECK_THROWS_AS(fringe_closed_form({4, DetectorPairing::Same, DecoheredBasis::None}, 0.0, 1.0),
                    InvalidInput);
    CHECK_THROWS_AS(fringe_closed_form(kG11, 0.0, -1.0), InvalidInput);
}

TEST_CASE("visibility values")
{
    for (const auto &k : {kG11, kG12, kG111})
        CHECK(visibility_closed_form(k, 0.0) == 1.0);
    CHECK(rel_err(visibility_closed_form(kG11, kNBar14), 0.241815151743129) < 1e-12);
    CHECK(rel_err(visibility_closed_form(kG12, kNBar14), 0.389454342546383) < 1e-12);
    CHECK(rel_err(visibility_closed_form(kG111, kNBar14), 0.488966458507030) < 1e-12);
    CHECK(rel_err(visibility_closed_form(kG111, kNBar24), 0.436651673869921) < 1e-12);
    CHECK(rel_err(visibility_closed_form(kHV, kNBar14), 0.0333212114459810) < 1e-12);
}

TEST_CASE("visibility is decreasing with the right limits")
{
    for (const auto &k : {kG11, kG12, kG111}) {
        double prev = 2.0;
        for (double n = 0.0; n < 200.0; n = n * 1.5 + 0.01) {
            const double v = visibility_closed_form(k, n);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            CHECK(v < prev);
            prev = v;
        }
    }
    const double n = 1e4;
    CHECK(std::abs(visibility_closed_form(kG11, n) - 0.2) <= 4.0 / (25.0 * n));
    CHECK(std::abs(visibility_closed_form(kG12, n) - 1.0 / 3.0) <= 2.0 / (9.0 * n));
    CHECK(std::abs(visibility_closed_form(kG111, n) - 3.0 / 7.0) <= 12.0 / (49.0 * n));
}

TEST_CASE("three-photon fringes are more visible")
{
    for (double n = 1e-3; n < 1e3; n *= 1.7)
        CHECK(visibility_closed_form(kG111, n) > visibility_closed_form(kG11, n));
}

TEST_CASE("period pi")
{
    for (const auto &k : {kG11, kG12, kG111, kHV, kPM})
        for (double n : {0.2, kNBar14})
            for (double phi : {0.0, 0.1, 0.77, 1.9, 3.0})
                CHECK(rel_err(fringe_closed_form(k, phi + kPi, n), fringe_closed_form(k, phi, n)) < 1e-13);
}

TEST_CASE("scan visibility equals the closed form")
{
    for (double n : {0.0405361859192274, 0.5, kNBar14, kNBar25})
        for (const auto &k : {kG11, kG12, kG111, kHV}) {
            CHECK(std::abs(scan_visibility(k, n) - visibility_closed_form(k, n)) < 1e-12);
        }
}

TEST_CASE("rate laws")
{
    RateParams unit;
    CHECK(excitation_rate(2, 0.0, unit) == 0.0);
    CHECK(excitation_rate(2, 1.0, unit) == 12.0);
    CHECK(excitation_rate(3, 1.0, unit) == 120.0);
    RateParams p;
    p.sigma2 = 2.5;
    p.sigma3 = 0.5;
    CHECK(excitation_rate(2, 1.0, p) == 30.0);
    CHECK(excitation_rate(3, 1.0, p) == 60.0);
    CHECK_THROWS_AS(excitation_rate(4, 1.0, unit), InvalidInput);
    RateParams bad;
    bad.v_max = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);

    for (double n : {0.5, 3.63, 36.6}) {
        CHECK(rel_err(excitation_rate(2, n, unit) / 4.0, phase_average(kG11, n)) < 1e-12);
        CHECK(rel_err(excitation_rate(3, n, unit) / 8.0, phase_average(kG111, n)) < 1e-12);
    }
    for (double n : {0.3, 4.0}) {
        const double h = 1e-6 * n;
        for (int order : {2, 3}) {
            const double fd = (rate_polynomial(order, n + h) - rate_polynomial(order, n - h)) / (2 * h);
            CHECK(rel_err(rate_polynomial_derivative(order, n), fd) < 1e-7);
        }
    }
}

TEST_CASE("rate ratio between two gains")
{
    const double ratio = rate_polynomial(3, kNBar24) / rate_polynomial(3, kNBar14);
    CHECK(rel_err(ratio, 507.440553182267) < 1e-10);
}
