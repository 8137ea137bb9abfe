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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sqf/gaussian_engine.hpp"

namespace sqf {

struct VacuumInput {
    bool operator==(const VacuumInput &) const = default;
};

/// Coherent seed used only for the detector calibration fringe.
struct CoherentInput {
    cplx alpha{1.0, 0.0};
    Polarization pol = Polarization::H;
    bool operator==(const CoherentInput &) const = default;
};

using SourceInput = std::variant<VacuumInput, CoherentInput>;

enum class DecoherenceBasis { HV, PM };

struct Decoherence {
    DecoherenceBasis basis = DecoherenceBasis::HV;
    double overlap = 1.0;
    bool operator==(const Decoherence &) const = default;
};

struct GaussianBackend {
    bool operator==(const GaussianBackend &) const = default;
};
struct FockBackend {
    int cutoff = 40;
    bool operator==(const FockBackend &) const = default;
};
struct MonteCarloBackend {
    std::uint64_t shots = 100000;
    std::uint64_t seed = 0;
    bool operator==(const MonteCarloBackend &) const = default;
};

using Backend = std::variant<GaussianBackend, FockBackend, MonteCarloBackend>;

/// One experiment: source, optional decoherence, phase + PBS, lossy detectors.
struct PipelineConfig {
    double gain = 0.0;
    SourceInput input = VacuumInput{};
    std::optional<Decoherence> decoherence;
    double phase_offset = 0.0;
    double detector_efficiency = 1.0;
    Backend backend = GaussianBackend{};
    double wavelength_nm = 795.0; // metadata only

    void validate() const;
    bool operator==(const PipelineConfig &) const = default;
};

std::string backend_tag(const Backend &backend);

enum class DetectorCombo { D1A, D1A_D1B, D1A_D1B_D1C, D1A_D2 };

int combo_order(DetectorCombo combo);
std::string combo_name(DetectorCombo combo);
DetectorCombo combo_from_name(const std::string &name);

/**
 * Heisenberg map of the phase shift in the +/- basis followed by the PBS:
 * (c1, c2) = W (a_H, a_V) with
 * W = e^{-i phi/2} [[cos phi/2, i sin phi/2], [i sin phi/2, cos phi/2]].
 */
Eigen::Matrix2cd detector_map(double phi);

/// H/V -> +/- basis change, a_pm = (a_H +- a_V)/sqrt(2). Self-inverse.
Eigen::Matrix2cd plus_minus_map();

/**
 * Gaussian state over the detector modes at phase phi.
 *
 * Modes labelled H belong to output 1 (c1), V to output 2 (c2); the temporal
 * index distinguishes decohered partners. Detector loss is included.
 */
GaussianState build_output_state(const PipelineConfig &config, double phi);

/// Output-1 and output-2 mode indices of a state from build_output_state.
std::vector<int> detector_modes(const GaussianState &state, int output);

/**
 * Normal-ordered coincidence moment of a detector combo.
 *
 * Same-output combos of order k give <:n1^k:>, with n1 summed over the
 * output's temporal modes; D1A_D2 gives <:n1 n2:>.
 */
double combo_moment(const GaussianState &state, DetectorCombo combo);

struct Coincidence {
    double value = 0.0;
    std::optional<double> stderr_value;
};

/// G^(k) for exact backends, k-fold click probability for Monte Carlo.
Coincidence evaluate_coincidence(const PipelineConfig &config, DetectorCombo combo, double phi);

struct ScanPoint {
    double phi = 0.0;
    double value = 0.0;
    std::optional<double> stderr_value;
};

struct FringeScan {
    std::vector<ScanPoint> points;
    DetectorCombo combo = DetectorCombo::D1A_D1B;
    PipelineConfig config;
    std::string backend;
};

/// start + i (stop - start) / points for i < points (stop excluded).
std::vector<double> uniform_grid(double start, double stop, int points);

FringeScan run_fringe_scan(const PipelineConfig &config, const std::vector<double> &phi_grid,
                           DetectorCombo combo);

enum class VisibilityMethod { Extrema, Fit };

struct VisibilityEstimate {
    double value = 0.0;
    std::optional<double> uncertainty;
};

VisibilityEstimate visibility_of_scan(const FringeScan &scan, VisibilityMethod method);

/// Cycles per 2pi of the largest Fourier component; nullopt for a flat scan.
/// Requires a uniform grid covering exactly [0, 2pi).
std::optional<int> dominant_harmonic(const FringeScan &scan);

} // namespace sqf
