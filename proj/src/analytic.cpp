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

#include "sqf/analytic.hpp"

#include <cmath>

#include "sqf/errors.hpp"

namespace sqf {

namespace {

void require_n_bar(double n_bar)
{
    if (!std::isfinite(n_bar) || n_bar < 0.0)
        throw InvalidInput("mean photon number must be finite and non-negative");
}

} // namespace

void FringeKind::validate() const
{
    if (order != 2 && order != 3)
        throw InvalidInput("fringe order must be 2 or 3");
    if (order == 3 && combo != DetectorPairing::Same)
        throw InvalidInput("order-3 fringes are same-detector only");
    if (order == 3 && decohered != DecoheredBasis::None)
        throw InvalidInput("no closed form for decohered order-3 fringes");
    if (combo == DetectorPairing::Cross && decohered != DecoheredBasis::None)
        throw InvalidInput("no closed form for decohered cross-detector fringes");
}

void RateParams::validate() const
{
    if (!(sigma2 > 0.0) || !(sigma3 > 0.0))
        throw InvalidInput("cross sections must be positive");
    if (!(v_max > 0.0 && v_max <= 1.0))
        throw InvalidInput("v_max must lie in (0, 1]");
    if (!(alpha > 0.0))
        throw InvalidInput("alpha must be positive");
}

double mean_photons(double g)
{
    if (!std::isfinite(g) || g < 0.0)
        throw InvalidInput("gain must be finite and non-negative");
    const double s = std::sinh(g);
    return s * s;
}

double gain_from_pump(double p_uv, double kappa)
{
    if (!std::isfinite(p_uv) || p_uv < 0.0)
        throw InvalidInput("pump power must be non-negative");
    if (!std::isfinite(kappa) || !(kappa > 0.0))
        throw InvalidInput("kappa must be positive");
    return kappa * std::sqrt(p_uv);
}

double fringe_closed_form(const FringeKind &kind, double phi, double n_bar)
{
    kind.validate();
    require_n_bar(n_bar);
    const double n = n_bar;
    const double s = std::sin(phi);
    const double sin2 = s * s;

    if (kind.order == 3)
        return 6.0 * n * n * n + 9.0 * n * n * (n + 1.0) * sin2;

    switch (kind.decohered) {
    case DecoheredBasis::HV:
        return 2.0 * n * n + 0.5 * n * sin2;
    case DecoheredBasis::PM:
        return 2.0 * n * n + 0.5 * n;
    case DecoheredBasis::None:
        break;
    }
    // (1 + cos 2phi)/2 = cos^2 phi and (1 - cos 2phi)/2 = sin^2 phi; the
    // squared forms keep phi and phi + pi bit-identical up to sin rounding.
    if (kind.combo == DetectorPairing::Cross)
        return n * n + (n * n + n) * (1.0 - sin2);
    return 2.0 * n * n + (n * n + n) * sin2;
}

double visibility_closed_form(const FringeKind &kind, double n_bar)
{
    kind.validate();
    require_n_bar(n_bar);
    const double n = n_bar;
    if (kind.order == 3)
        return (3.0 * n + 3.0) / (7.0 * n + 3.0);
    switch (kind.decohered) {
    case DecoheredBasis::HV:
        return 1.0 / (8.0 * n + 1.0);
    case DecoheredBasis::PM:
        return 0.0;
    case DecoheredBasis::None:
        break;
    }
    if (kind.combo == DetectorPairing::Cross)
        return (n + 1.0) / (3.0 * n + 1.0);
    return (n + 1.0) / (5.0 * n + 1.0);
}

double rate_polynomial(int order, double n_bar)
{
    require_n_bar(n_bar);
    const double n = n_bar;
    if (order == 2)
        return 2.0 * (n + 5.0 * n * n);
    if (order == 3)
        return 12.0 * (7.0 * n * n * n + 3.0 * n * n);
    throw InvalidInput("excitation order must be 2 or 3");
}

double rate_polynomial_derivative(int order, double n_bar)
{
    require_n_bar(n_bar);
    const double n = n_bar;
    if (order == 2)
        return 2.0 * (1.0 + 10.0 * n);
    if (order == 3)
        return 12.0 * (21.0 * n * n + 6.0 * n);
    throw InvalidInput("excitation order must be 2 or 3");
}

double excitation_rate(int order, double n_bar, const RateParams &params)
{
    params.validate();
    const double sigma = order == 2 ? params.sigma2 : params.sigma3;
    return sigma * rate_polynomial(order, n_bar);
}

} // namespace sqf
