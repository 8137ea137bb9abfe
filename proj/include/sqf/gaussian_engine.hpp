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
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sqf/errors.hpp"

namespace sqf {

using cplx = std::complex<double>;

enum class Polarization { H, V, Plus, Minus, Derived };

struct ModeLabel {
    Polarization pol = Polarization::Derived;
    int temporal = 0;

    bool operator==(const ModeLabel &) const = default;
};

/**
 * Multimode Gaussian state in normal-ordered form.
 *
 * mean_i = <a_i>, N_ij = <da_i^dag da_j>, M_ij = <da_i da_j> with da = a - <a>.
 * Every correlation function of interest here is normal ordered, so this
 * parameterization needs no reordering corrections.
 */
class GaussianState {
public:
    GaussianState(Eigen::VectorXcd mean, Eigen::MatrixXcd n_mat, Eigen::MatrixXcd m_mat,
                  std::vector<ModeLabel> labels);

    int mode_count() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXcd &mean() const { return mean_; }
    const Eigen::MatrixXcd &n_mat() const { return n_mat_; }
    const Eigen::MatrixXcd &m_mat() const { return m_mat_; }
    const std::vector<ModeLabel> &labels() const { return labels_; }
    const ModeLabel &label(int i) const { return labels_.at(static_cast<size_t>(i)); }

    GaussianState with_label(int i, ModeLabel label) const;

    /// Smallest eigenvalue of [[N + I, M*], [M, N*]]; physical states have it >= 0.
    double physicality_margin() const;
    /// Rounding in the margin grows with the photon number, so tol is relative to 1 + total_photons().
    bool is_physical(double tol = 1e-10) const { return physicality_margin() >= -tol * (1.0 + total_photons()); }

    /// Sum of diagonal N plus |mean|^2, the total mean photon number.
    double total_photons() const;

private:
    Eigen::VectorXcd mean_;
    Eigen::MatrixXcd n_mat_;
    Eigen::MatrixXcd m_mat_;
    std::vector<ModeLabel> labels_;
};

/// m vacuum modes; labels default to Derived/0 when omitted.
GaussianState gaussian_vacuum(int m, std::vector<ModeLabel> labels = {});

/// Two-mode squeezer: a_i -> cosh g a_i + sinh g a_j^dag and symmetrically for j.
GaussianState apply_two_mode_squeeze(const GaussianState &state, int i, int j, double g);

/// Passive unitary on the listed modes, a_{modes[k]} -> sum_l u_kl a_{modes[l]}.
GaussianState apply_passive_unitary(const GaussianState &state, std::span<const int> modes,
                                    const Eigen::MatrixXcd &u);

/// Same, acting on all modes in order.
GaussianState apply_passive_unitary(const GaussianState &state, const Eigen::MatrixXcd &u);

GaussianState apply_displacement(const GaussianState &state, int i, cplx alpha);

/// Pure-loss channel with transmissivity eta on mode i.
GaussianState apply_loss(const GaussianState &state, int i, double eta);

/**
 * Makes part of mode i distinguishable in time.
 *
 * Appends a vacuum ancilla (same polarization label, temporal index 1) and
 * rotates a_i -> sqrt(overlap) a_i + sqrt(1 - overlap) a_anc.
 */
GaussianState split_temporal_mode(const GaussianState &state, int i, double overlap);

constexpr int kMaxWickOrder = 8;

/**
 * <a^dag_{c_1} ... a^dag_{c_p} a_{d_1} ... a_{d_q}> by explicit Wick expansion.
 *
 * Each operator is either replaced by its mean or contracted with a later
 * operator (a^dag a -> N, a a -> M, a^dag a^dag -> M*). Exact for Gaussian
 * states; total order is limited to 8.
 */
cplx wick_normal_moment(const GaussianState &state, std::span<const int> creators,
                        std::span<const int> annihilators);

/// Probability that all listed modes are empty.
double vacuum_probability(const GaussianState &state, std::span<const int> modes);

} // namespace sqf
