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

#include <complex>

#include <Eigen/Dense>

#include "sqf/opa_params.hpp"

namespace sqf {

using cplx = std::complex<double>;

/**
 * Truncated two-mode Fock state.
 *
 * Amplitudes are stored densely on the grid 0 <= n_H, n_V <= cutoff. The
 * probability weight that was cut away is carried in norm_deficit so that
 * callers can bound truncation bias. Instances are immutable.
 */
class DenseFockState {
public:
    /// Validates the norm invariants; throws InvalidInput on violation.
    DenseFockState(Eigen::MatrixXcd amplitudes, double norm_deficit);

    static DenseFockState vacuum(int cutoff);

    int cutoff() const { return static_cast<int>(amplitudes_.rows()) - 1; }
    cplx amplitude(int n_h, int n_v) const;
    const Eigen::MatrixXcd &amplitudes() const { return amplitudes_; }
    double norm_deficit() const { return norm_deficit_; }
    double stored_norm() const { return amplitudes_.squaredNorm(); }

private:
    Eigen::MatrixXcd amplitudes_;
    double norm_deficit_;
};

constexpr double kDefaultTailTolerance = 1e-10;
constexpr int kMaxDenseMomentOrder = 8;

/// Two-mode squeezed vacuum built directly from its Schmidt coefficients.
/// Throws TruncationError when gamma^(2(cutoff+1)) exceeds tail_tolerance.
DenseFockState build_tmsv_dense(const OpaParams &params, int cutoff,
                                double tail_tolerance = kDefaultTailTolerance);

/// Coherent state alpha in mode H (pol_v = false) or V, vacuum in the other.
DenseFockState build_coherent_dense(cplx alpha, bool pol_v, int cutoff,
                                    double tail_tolerance = kDefaultTailTolerance);

/**
 * Smallest cutoff whose truncated tail is below tolerance for moments of the
 * given order.
 *
 * The bound used is sum_{n > cutoff} (1 - x) x^n max(1, (2n)^order) with
 * x = tanh^2 g, i.e. the dropped pair probability weighted by the largest
 * value a normal-ordered moment of that order can take inside the sector of
 * 2n photons. order = 0 reduces to the geometric tail x^(cutoff+1).
 */
int required_cutoff(const OpaParams &params, int order, double tolerance);

/// The weighted tail used by required_cutoff, evaluated at a given cutoff.
double truncation_tail(const OpaParams &params, int order, int cutoff);

/**
 * Matrix of the passive two-mode unitary restricted to the sector of N total
 * photons, in the basis |k, N-k>, k = 0..N.
 *
 * Convention: u maps annihilators as a_i -> sum_j u_ij a_j in the Heisenberg
 * picture, so the returned matrix acts on state amplitudes. Built by
 * exponentiating the (tridiagonal) generator representation.
 */
Eigen::MatrixXcd sector_unitary(int total_photons, const Eigen::Matrix2cd &u);

/**
 * Applies the passive linear-optics unitary induced by u.
 *
 * The result grid is enlarged to the highest occupied total photon number so
 * no amplitude leaves the representation. norm_deficit is recomputed from the
 * rotated amplitudes and must match the input within 1e-12.
 */
DenseFockState apply_mode_unitary(const DenseFockState &state, const Eigen::Matrix2cd &u);

/// <a_H^dag^p a_V^dag^q a_H^r a_V^s> on the truncated state; p+q+r+s <= 8.
cplx normal_moment_dense(const DenseFockState &state, int p, int q, int r, int s);

/// |amplitude|^2 over (n_H, n_V).
Eigen::MatrixXd joint_photon_pmf(const DenseFockState &state);

/// Throws InvalidInput unless u is unitary within tol (max-abs of u^dag u - 1).
void require_unitary(const Eigen::MatrixXcd &u, double tol = 1e-12);

} // namespace sqf
