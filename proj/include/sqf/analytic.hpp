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

namespace sqf {

// Closed-form fringe and rate laws for the vacuum-seeded amplifier followed
// by a phase shift in the +/- basis and a polarizing beam splitter.

enum class DetectorPairing { Same, Cross };
enum class DecoheredBasis { None, HV, PM };

struct FringeKind {
    int order = 2;
    DetectorPairing combo = DetectorPairing::Same;
    DecoheredBasis decohered = DecoheredBasis::None;

    /// Throws InvalidInput for combinations without a closed form.
    void validate() const;
};

inline constexpr FringeKind kG11{2, DetectorPairing::Same, DecoheredBasis::None};
inline constexpr FringeKind kG12{2, DetectorPairing::Cross, DecoheredBasis::None};
inline constexpr FringeKind kG111{3, DetectorPairing::Same, DecoheredBasis::None};

/// Scale factors of the calibration fits. sigma2/sigma3 have no physical units.
struct RateParams {
    double sigma2 = 1.0;
    double sigma3 = 1.0;
    double v_max = 1.0;
    double alpha = 1.0;

    void validate() const;
};

/// sinh^2 g.
double mean_photons(double g);

/// kappa * sqrt(p_uv).
double gain_from_pump(double p_uv, double kappa);

/**
 * Coincidence fringe value at phase phi for mean photon number n_bar.
 *
 *   G12   = n^2 + (n^2 + n)(1 + cos 2phi)/2
 *   G11   = 2n^2 + (n^2 + n)(1 - cos 2phi)/2
 *   G111  = 6n^3 + 9n^2(n + 1) sin^2 phi
 *   G11 with H/V made distinguishable: 2n^2 + (n/2) sin^2 phi
 *   G11 with +/- made distinguishable: 2n^2 + n/2
 */
double fringe_closed_form(const FringeKind &kind, double phi, double n_bar);

/// (max - min) / (max + min) of fringe_closed_form over one period.
double visibility_closed_form(const FringeKind &kind, double n_bar);

/// R2 = 2 sigma2 (n + 5n^2), R3 = 12 sigma3 (7n^3 + 3n^2).
double excitation_rate(int order, double n_bar, const RateParams &params);

/// The n_bar polynomial of excitation_rate with unit cross section.
double rate_polynomial(int order, double n_bar);
/// d/dn of rate_polynomial.
double rate_polynomial_derivative(int order, double n_bar);

} // namespace sqf
