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

#pragma once

#include <cmath>

#include "sqf/errors.hpp"

namespace sqf {

/**
 * Source parameters of the unseeded amplifier.
 *
 * Everything is derived from the nonlinear gain g: the state is
 * sum_n gamma^n |n,n> / c_norm with gamma = tanh g, c_norm = cosh g, and each
 * polarization mode carries n_bar = sinh^2 g photons on average.
 */
struct OpaParams {
    double g = 0.0;
    double gamma = 0.0;
    double c_norm = 1.0;
    double n_bar = 0.0;

    static OpaParams from_gain(double gain)
    {
        if (!std::isfinite(gain) || gain < 0.0)
            throw InvalidInput("gain must be finite and non-negative");
        const double s = std::sinh(gain);
        return OpaParams{gain, std::tanh(gain), std::cosh(gain), s * s};
    }

    /// Ratio p_n / p_{n-1} of the geometric photon-pair distribution.
    double pair_ratio() const { return gamma * gamma; }
};

} // namespace sqf
