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

#include "sqf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sqf/fit.hpp"
#include "sqf/fock_engine.hpp"
#include "sqf/montecarlo.hpp"
#include "sqf/parallel.hpp"

namespace sqf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool finite(double v) { return std::isfinite(v); }

int input_mode(const CoherentInput &in) { return in.pol == Polarization::V ? 1 : 0; }

std::vector<int> with_label_pol(const GaussianState &state, Polarization pol)
{
    std::vector<int> out;
    for (int i = 0; i < state.mode_count(); ++i)
        if (state.label(i).pol == pol)
            out.push_back(i);
    return out;
}

// Normal-ordered moment of (sum_t n_t)^k over the given modes, expanded
// multinomially into products of single-mode powers.
double same_output_moment(const GaussianState &state, const std::vector<int> &modes, int k)
{
    if (modes.empty())
        return 0.0;
    std::vector<int> powers(modes.size(), 0);
    double total = 0.0;

    auto factorial = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i)
            f *= i;
        return f;
    };

    // Enumerate compositions of k into modes.size() parts.
    std::function<void(size_t, int)> recurse = [&](size_t idx, int remaining) {
        if (idx + 1 == modes.size()) {
            powers[idx] = remaining;
            double coeff = factorial(k);
            std::vector<int> ops;
            for (size_t t = 0; t < modes.size(); ++t) {
                coeff /= factorial(powers[t]);
                for (int r = 0; r < powers[t]; ++r)
                    ops.push_back(modes[t]);
            }
            total += coeff * wick_normal_moment(state, ops, ops).real();
            return;
        }
        for (int p = 0; p <= remaining; ++p) {
            powers[idx] = p;
            recurse(idx + 1, remaining - p);
        }
    };
    recurse(0, k);
    return total;
}

double fock_coincidence(const PipelineConfig &config, const FockBackend &fock, DetectorCombo combo,
                        double phi)
{
    if (config.decoherence && config.decoherence->overlap < 1.0)
        throw InvalidInput("fock backend cannot represent temporal-mode decoherence");

    DenseFockState source = DenseFockState::vacuum(fock.cutoff);
    if (const auto *coh = std::get_if<CoherentInput>(&config.input)) {
        if (std::norm(coh->alpha) > fock.cutoff / 4.0)
            throw TruncationError("|alpha|^2 exceeds cutoff/4 for the fock backend");
        source = build_coherent_dense(coh->alpha, coh->pol == Polarization::V, fock.cutoff);
    } else {
        source = build_tmsv_dense(OpaParams::from_gain(config.gain), fock.cutoff);
    }
    const DenseFockState out = apply_mode_unitary(source, detector_map(phi + config.phase_offset));

    const int k = combo_order(combo);
    const double loss = std::pow(config.detector_efficiency, k);
    if (combo == DetectorCombo::D1A_D2)
        return loss * normal_moment_dense(out, 1, 1, 1, 1).real();
    return loss * normal_moment_dense(out, k, 0, k, 0).real();
}

} // namespace

void PipelineConfig::validate() const
{
    if (!finite(gain) || gain < 0.0)
        throw InvalidInput("gain must be finite and non-negative");
    if (const auto *coh = std::get_if<CoherentInput>(&input)) {
        if (!finite(coh->alpha.real()) || !finite(coh->alpha.imag()))
            throw InvalidInput("coherent amplitude must be finite");
        if (coh->pol != Polarization::H && coh->pol != Polarization::V)
            throw InvalidInput("coherent input polarization must be H or V");
        if (gain != 0.0)
            throw InvalidInput("the amplifier is unseeded: coherent input requires gain 0");
    }
    if (decoherence && !(decoherence->overlap >= 0.0 && decoherence->overlap <= 1.0))
        throw InvalidInput("decoherence overlap must lie in [0, 1]");
    if (!finite(phase_offset))
        throw InvalidInput("phase offset must be finite");
    if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0))
        throw InvalidInput("detector efficiency must lie in (0, 1]");
    if (!finite(wavelength_nm) || !(wavelength_nm > 0.0))
        throw InvalidInput("wavelength must be positive");
    if (const auto *fock = std::get_if<FockBackend>(&backend); fock && fock->cutoff < 0)
        throw InvalidInput("fock cutoff must be non-negative");
    if (const auto *mc = std::get_if<MonteCarloBackend>(&backend); mc && mc->shots < 1)
        throw InvalidInput("monte carlo shots must be >= 1");
}

std::string backend_tag(const Backend &backend)
{
    if (std::holds_alternative<GaussianBackend>(backend))
        return "gaussian";
    if (std::holds_alternative<FockBackend>(backend))
        return "fock";
    return "montecarlo";
}

int combo_order(DetectorCombo combo)
{
    switch (combo) {
    case DetectorCombo::D1A:
        return 1;
    case DetectorCombo::D1A_D1B:
    case DetectorCombo::D1A_D2:
        return 2;
    case DetectorCombo::D1A_D1B_D1C:
        return 3;
    }
    throw InvalidInput("unknown detector combo");
}

std::string combo_name(DetectorCombo combo)
{
    switch (combo) {
    case DetectorCombo::D1A:
        return "D1A";
    case DetectorCombo::D1A_D1B:
        return "D1A_D1B";
    case DetectorCombo::D1A_D1B_D1C:
        return "D1A_D1B_D1C";
    case DetectorCombo::D1A_D2:
        return "D1A_D2";
    }
    throw InvalidInput("unknown detector combo");
}

DetectorCombo combo_from_name(const std::string &name)
{
    for (auto c : {DetectorCombo::D1A, DetectorCombo::D1A_D1B, DetectorCombo::D1A_D1B_D1C,
                   DetectorCombo::D1A_D2})
        if (combo_name(c) == name)
            return c;
    throw InvalidInput("unknown detector combo '" + name + "'");
}

Eigen::Matrix2cd detector_map(double phi)
{
    const double c = std::cos(0.5 * phi);
    const double s = std::sin(0.5 * phi);
    const cplx i_s(0.0, s);
    Eigen::Matrix2cd w;
    w << c, i_s, i_s, c;
    return std::polar(1.0, -0.5 * phi) * w;
}

Eigen::Matrix2cd plus_minus_map()
{
    const double r = std::numbers::sqrt2 / 2.0;
    Eigen::Matrix2cd b;
    b << r, r, r, -r;
    return b;
}

GaussianState build_output_state(const PipelineConfig &config, double phi)
{
    config.validate();
    GaussianState state =
        gaussian_vacuum(2, {ModeLabel{Polarization::H, 0}, ModeLabel{Polarization::V, 0}});

    if (const auto *coh = std::get_if<CoherentInput>(&config.input))
        state = apply_displacement(state, input_mode(*coh), coh->alpha);
    else
        state = apply_two_mode_squeeze(state, 0, 1, config.gain);

    const int h0[2] = {0, 1};
    const int h1[2] = {3, 2};
    const bool split = config.decoherence.has_value();
    if (split) {
        const bool pm = config.decoherence->basis == DecoherenceBasis::PM;
        if (pm) {
            state = apply_passive_unitary(state, h0, plus_minus_map());
            state = state.with_label(0, {Polarization::Plus, 0}).with_label(1, {Polarization::Minus, 0});
        }
        // Mode 2: delayed part of V (or -); mode 3: its empty H (or +) partner.
        state = split_temporal_mode(state, 1, config.decoherence->overlap);
        state = split_temporal_mode(state, 0, 1.0);
        if (pm) {
            state = apply_passive_unitary(state, h0, plus_minus_map());
            state = apply_passive_unitary(state, h1, plus_minus_map());
        }
        state = state.with_label(0, {Polarization::H, 0})
                    .with_label(1, {Polarization::V, 0})
                    .with_label(2, {Polarization::V, 1})
                    .with_label(3, {Polarization::H, 1});
    }

    // Phase in the +/- basis followed by the PBS; H-labelled modes are output 1.
    const Eigen::Matrix2cd w = detector_map(phi + config.phase_offset);
    state = apply_passive_unitary(state, h0, w);
    if (split)
        state = apply_passive_unitary(state, h1, w);

    if (config.detector_efficiency < 1.0)
        for (int i = 0; i < state.mode_count(); ++i)
            state = apply_loss(state, i, config.detector_efficiency);

    if (!state.is_physical())
        throw NumericalError("output state violates physicality");
    return state;
}

std::vector<int> detector_modes(const GaussianState &state, int output)
{
    if (output != 1 && output != 2)
        throw InvalidInput("output must be 1 or 2");
    return with_label_pol(state, output == 1 ? Polarization::H : Polarization::V);
}

double combo_moment(const GaussianState &state, DetectorCombo combo)
{
    const std::vector<int> out1 = detector_modes(state, 1);
    if (combo != DetectorCombo::D1A_D2)
        return same_output_moment(state, out1, combo_order(combo));

    const std::vector<int> out2 = detector_modes(state, 2);
    double total = 0.0;
    for (int a : out1)
        for (int b : out2) {
            const int cre[2] = {a, b};
            const int ann[2] = {b, a};
            total += wick_normal_moment(state, cre, ann).real();
        }
    return total;
}

Coincidence evaluate_coincidence(const PipelineConfig &config, DetectorCombo combo, double phi)
{
    config.validate();
    if (const auto *fock = std::get_if<FockBackend>(&config.backend))
        return {fock_coincidence(config, *fock, combo, phi), std::nullopt};
    if (const auto *mc = std::get_if<MonteCarloBackend>(&config.backend)) {
        const CountsTable table = simulate_counts(config, {phi}, mc->shots, mc->seed);
        const CountsRow &row = table.rows.front();
        const auto count = row.count_for(combo);
        return {row.rate(count), row.stderr_of(count)};
    }
    return {combo_moment(build_output_state(config, phi), combo), std::nullopt};
}

std::vector<double> uniform_grid(double start, double stop, int points)
{
    if (points < 1 || !finite(start) || !finite(stop) || !(stop > start))
        throw InvalidInput("grid needs points >= 1 and stop > start");
    std::vector<double> grid(static_cast<size_t>(points));
    const double step = (stop - start) / points;
    for (int i = 0; i < points; ++i)
        grid[static_cast<size_t>(i)] = start + i * step;
    return grid;
}

FringeScan run_fringe_scan(const PipelineConfig &config, const std::vector<double> &phi_grid,
                           DetectorCombo combo)
{
    config.validate();
    if (phi_grid.empty())
        throw InvalidInput("phase grid is empty");
    for (size_t i = 1; i < phi_grid.size(); ++i)
        if (!(phi_grid[i] > phi_grid[i - 1]))
            throw InvalidInput("phase grid must be strictly increasing");

    FringeScan scan;
    scan.combo = combo;
    scan.config = config;
    scan.backend = backend_tag(config.backend);
    scan.points.resize(phi_grid.size());

    if (const auto *mc = std::get_if<MonteCarloBackend>(&config.backend)) {
        const CountsTable table = simulate_counts(config, phi_grid, mc->shots, mc->seed);
        for (size_t i = 0; i < phi_grid.size(); ++i) {
            const CountsRow &row = table.rows[i];
            const auto count = row.count_for(combo);
            scan.points[i] = {phi_grid[i], row.rate(count), row.stderr_of(count)};
        }
        return scan;
    }

    parallel_for(phi_grid.size(), [&](size_t i) {
        const Coincidence c = evaluate_coincidence(config, combo, phi_grid[i]);
        scan.points[i] = {phi_grid[i], c.value, std::nullopt};
    });
    return scan;
}

VisibilityEstimate visibility_of_scan(const FringeScan &scan, VisibilityMethod method)
{
    const auto &pts = scan.points;
    if (pts.size() < 3)
        throw InvalidInput("scan too short for a visibility estimate");
    const double span = pts.back().phi - pts.front().phi;
    const double covered = span + span / static_cast<double>(pts.size() - 1);
    if (covered < std::numbers::pi * (1.0 - 1e-9))
        throw InvalidInput("scan too short: it must cover one fringe period (pi)");

    if (method == VisibilityMethod::Extrema) {
        auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [](const auto &a, const auto &b) {
            return a.value < b.value;
        });
        const double sum = hi->value + lo->value;
        if (sum == 0.0)
            return {0.0, std::nullopt};
        return {(hi->value - lo->value) / sum, std::nullopt};
    }

    double min_var = 0.0;
    for (const auto &p : pts)
        if (p.stderr_value && *p.stderr_value > 0.0) {
            const double v = *p.stderr_value * *p.stderr_value;
            min_var = min_var == 0.0 ? v : std::min(min_var, v);
        }
    std::vector<WeightedPoint> data;
    data.reserve(pts.size());
    for (const auto &p : pts) {
        double w = 1.0;
        if (min_var > 0.0) {
            const double s = p.stderr_value.value_or(0.0);
            w = 1.0 / std::max(s * s, min_var);
        }
        data.push_back({p.phi, p.value, w});
    }
    FitOptions options;
    options.scale_covariance = min_var == 0.0;
    const FitResult fit = fit_fringe(data, options);
    if (!fit.converged)
        throw NumericalError("fringe fit did not converge: " + fit.message);
    return {fit.derived.at("visibility"), fit.derived.at("visibility_stderr")};
}

std::optional<int> dominant_harmonic(const FringeScan &scan)
{
    const auto n = scan.points.size();
    if (n < 4)
        throw InvalidInput("harmonic analysis needs at least 4 points");
    const double step = kTwoPi / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i)
        if (std::abs(scan.points[i].phi - static_cast<double>(i) * step) > 1e-9)
            throw InvalidInput("harmonic analysis needs a uniform grid over [0, 2pi)");

    double scale = 0.0;
    for (const auto &p : scan.points)
        scale = std::max(scale, std::abs(p.value));

    int best = 0;
    double best_amp = 0.0;
    for (size_t f = 1; f <= n / 2; ++f) {
        cplx acc = 0.0;
        for (size_t i = 0; i < n; ++i)
            acc += scan.points[i].value *
                   std::polar(1.0, -static_cast<double>(f) * scan.points[i].phi);
        const double amp = 2.0 * std::abs(acc) / static_cast<double>(n);
        if (amp > best_amp) {
            best_amp = amp;
            best = static_cast<int>(f);
        }
    }
    if (best == 0 || best_amp <= 1e-12 * std::max(scale, 1e-300))
        return std::nullopt;
    return best;
}

} // namespace sqf
