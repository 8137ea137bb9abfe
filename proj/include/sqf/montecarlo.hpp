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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqf/pipeline.hpp"

namespace sqf {

// Pulse-by-pulse photon counting with threshold detectors.
//
// Output 1 of the PBS is fanned out evenly over three detectors (D1A, D1B,
// D1C); output 2 feeds D2 alone. Every photon reaching a detector is
// registered with probability detector_efficiency and a detector clicks when
// at least one photon is registered.

constexpr int kOutput1Fanout = 3;
constexpr std::uint64_t kDefaultChunkSize = 1u << 16;
inline constexpr const char *kRngAlgorithm =
    "mt19937_64; chunk seed = splitmix64(splitmix64(splitmix64(seed) ^ point) ^ chunk)";

using Rng = std::mt19937_64;

/// Stream seed for (point, chunk) derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t point, std::uint64_t chunk);

/**
 * <k, 2n-k| U |n, n> for k = 0..2n, with U the passive unitary of u
 * (Heisenberg convention a_i -> sum_j u_ij a_j).
 *
 * Built by the recurrence U|n,n> = b0^dag b1^dag U|n-1,n-1> / n with
 * b_j^dag = sum_i u_ij a_i^dag. On the 2n-2 photon sector the operator
 * b0^dag b1^dag / n has norm 1, so rounding errors do not grow.
 */
std::vector<cplx> rotation_amplitudes(int n, const Eigen::Matrix2cd &u);

/// Cumulative outcome probabilities over k for |n,n> under u, in O(n) work.
/// Unnormalized: the last entry carries the total.
std::vector<double> sector_outcome_cdf(int n, const Eigen::Matrix2cd &u);

struct ClickOutcome {
    bool d1a = false;
    bool d1b = false;
    bool d1c = false;
    bool d2 = false;
};

struct PhotonCounts {
    int output1 = 0;
    int output2 = 0;
};

/**
 * Per-phase sampling tables for one configuration.
 *
 * Vacuum input: the pair number n is geometric with mean n_bar; without
 * decoherence the output occupation (k, 2n-k) is drawn from
 * |rotation_amplitudes(n, W)|^2, with full decoherence each photon is routed
 * independently. Coherent input: independent Poisson counts per output.
 */
class PulseSampler {
public:
    PulseSampler(const PipelineConfig &config, double phi);

    /// Photon numbers arriving at the two PBS outputs (before detection).
    PhotonCounts sample_photons(Rng &rng) const;
    ClickOutcome sample(Rng &rng) const;

private:
    enum class Mode { Coherent, Schmidt, DecoheredHV, DecoheredPM };

    int sample_output1_given_pairs(int n, Rng &rng) const;

    Mode mode_;
    double eta_;
    double n_bar_ = 0.0;
    double mean1_ = 0.0; // coherent means per output
    double mean2_ = 0.0;
    double p_h_to_1_ = 1.0; // HV-decohered routing probability of an H photon
    Eigen::Matrix2cd w_;
    std::vector<std::vector<double>> cdf_; // Schmidt outcome CDFs, indexed by n
};

ClickOutcome sample_pulse(const PipelineConfig &config, double phi, Rng &rng);

struct CountsRow {
    double phi = 0.0;
    std::uint64_t shots = 0;
    std::uint64_t d1a = 0;
    std::uint64_t d1b = 0;
    std::uint64_t d1c = 0;
    std::uint64_t d2 = 0;
    std::uint64_t pairs = 0;       // D1A & D1B
    std::uint64_t cross_pairs = 0; // D1A & D2
    std::uint64_t triples = 0;     // D1A & D1B & D1C

    double rate(std::uint64_t count) const;
    double stderr_of(std::uint64_t count) const;
    std::uint64_t count_for(DetectorCombo combo) const;
};

struct CountsTable {
    std::vector<CountsRow> rows;
    std::uint64_t seed = 0;
    std::uint64_t chunk_size = kDefaultChunkSize;
    std::string rng_algorithm = kRngAlgorithm;
};

/**
 * Aggregated click statistics over a phase grid. Deterministic for a given
 * (seed, chunk_size) independent of the number of worker threads.
 */
CountsTable simulate_counts(const PipelineConfig &config, const std::vector<double> &phi_grid,
                            std::uint64_t shots, std::uint64_t seed,
                            std::uint64_t chunk_size = kDefaultChunkSize, int threads = 0);

struct ClickProbabilities {
    double d1a = 0.0;
    double d2 = 0.0;
    double pair = 0.0;       // D1A & D1B
    double cross_pair = 0.0; // D1A & D2
    double triple = 0.0;     // D1A & D1B & D1C

    double for_combo(DetectorCombo combo) const;
};

/// Exact click probabilities from vacuum projections of the Gaussian output state.
ClickProbabilities exact_click_probabilities(const PipelineConfig &config, double phi);

/// Exact click probabilities from a joint photon-number pmf over (output1, output2).
ClickProbabilities click_probabilities_from_pmf(const Eigen::MatrixXd &pmf, double eta);

} // namespace sqf
