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

#include "sqf/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "sqf/fock_engine.hpp"
#include "sqf/parallel.hpp"

namespace sqf {

namespace {

constexpr int kMaxCachedPairs = 400;
constexpr double kCacheTail = 1e-15;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Bernoulli loop for small m, library sampler otherwise.
int binomial(int m, double p, Rng &rng)
{
    if (m <= 0 || p <= 0.0)
        return 0;
    if (p >= 1.0)
        return m;
    if (m <= 24) {
        int hits = 0;
        for (int i = 0; i < m; ++i)
            hits += uniform01(rng) < p ? 1 : 0;
        return hits;
    }
    return std::binomial_distribution<int>(m, p)(rng);
}

// b0^dag b1^dag applied to a vector over the sector |k, N-k>.
std::vector<cplx> apply_pair_creation(const std::vector<cplx> &psi, const Eigen::Matrix2cd &u)
{
    auto create = [](const std::vector<cplx> &in, cplx c0, cplx c1) {
        const int n = static_cast<int>(in.size()) - 1;
        std::vector<cplx> out(in.size() + 1, cplx(0.0));
        for (int k = 0; k <= n; ++k) {
            out[static_cast<size_t>(k + 1)] += c0 * std::sqrt(static_cast<double>(k + 1)) * in[static_cast<size_t>(k)];
            out[static_cast<size_t>(k)] += c1 * std::sqrt(static_cast<double>(n - k + 1)) * in[static_cast<size_t>(k)];
        }
        return out;
    };
    return create(create(psi, u(0, 1), u(1, 1)), u(0, 0), u(1, 0));
}

std::vector<double> outcome_cdf(const std::vector<cplx> &amps)
{
    std::vector<double> cdf(amps.size());
    double acc = 0.0;
    for (size_t k = 0; k < amps.size(); ++k) {
        acc += std::norm(amps[k]);
        cdf[k] = acc;
    }
    return cdf;
}

// Outcome probabilities |d^n_{m,0}(beta)|^2 for k = n + m, with
// cos(beta/2) = |u00|. Three-term recurrence in m from the edge inward
// (stable through the decaying region), mirrored by |d_{-m,0}| = |d_{m,0}|.
std::vector<double> sector_cdf(int n, const Eigen::Matrix2cd &u)
{
    std::vector<double> cdf(static_cast<size_t>(2 * n + 1), 0.0);
    const double c = std::abs(u(0, 0));
    const double s = std::abs(u(0, 1));
    const double sin_beta = 2.0 * c * s;
    if (n == 0 || sin_beta == 0.0) {
        std::fill(cdf.begin() + n, cdf.end(), 1.0);
        return cdf;
    }
    const double cot_beta = (c * c - s * s) / sin_beta;
    const double j = n;

    std::vector<double> f(static_cast<size_t>(n + 1)); // f[i] = d_{m,0}, m = i - n
    f[0] = 1.0;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double m = i - n;
        const double next = -(2.0 * m * cot_beta * f[static_cast<size_t>(i)] +
                              std::sqrt((j + m) * (j - m + 1.0)) * prev) /
                            std::sqrt((j - m) * (j + m + 1.0));
        prev = f[static_cast<size_t>(i)];
        f[static_cast<size_t>(i + 1)] = next;
        if (std::abs(next) > 1e150) {
            for (int t = 0; t <= i + 1; ++t)
                f[static_cast<size_t>(t)] *= 1e-150;
            prev *= 1e-150;
        }
    }
    double acc = 0.0;
    for (int k = 0; k <= 2 * n; ++k) {
        const double v = f[static_cast<size_t>(k <= n ? k : 2 * n - k)];
        acc += v * v;
        cdf[static_cast<size_t>(k)] = acc;
    }
    if (!(acc > 0.0) || !std::isfinite(acc))
        throw NumericalError("sector outcome recurrence failed");
    return cdf;
}

int sample_index(const std::vector<double> &cdf, double r)
{
    const double target = r * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

// Probability that no detector in the set fires, for each photon-number
// generating function evaluated at the set's transmissivities.
struct NoClickSet {
    double t1; // fraction of output-1 light reaching the chosen detectors
    double t2;
};

NoClickSet no_click_set(int fanned, bool with_d2, double eta)
{
    return {eta * fanned / static_cast<double>(kOutput1Fanout), with_d2 ? eta : 0.0};
}

template <typename NoClick>
ClickProbabilities click_probabilities(NoClick &&p0)
{
    // Inclusion-exclusion over subsets of the required detectors.
    const double none = 1.0;
    const double a = p0(no_click_set(1, false, 1.0));
    const double ab = p0(no_click_set(2, false, 1.0));
    const double abc = p0(no_click_set(3, false, 1.0));
    const double d2 = p0(no_click_set(0, true, 1.0));
    const double a_d2 = p0(no_click_set(1, true, 1.0));

    ClickProbabilities out;
    out.d1a = none - a;
    out.d2 = none - d2;
    out.pair = none - 2.0 * a + ab;
    out.triple = none - 3.0 * a + 3.0 * ab - abc;
    out.cross_pair = none - a - d2 + a_d2;
    return out;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t point, std::uint64_t chunk)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ point) ^ chunk);
}

std::vector<double> sector_outcome_cdf(int n, const Eigen::Matrix2cd &u)
{
    if (n < 0)
        throw InvalidInput("pair number must be non-negative");
    require_unitary(u);
    return sector_cdf(n, u);
}

std::vector<cplx> rotation_amplitudes(int n, const Eigen::Matrix2cd &u)
{
    if (n < 0)
        throw InvalidInput("pair number must be non-negative");
    require_unitary(u);
    std::vector<cplx> psi{cplx(1.0)};
    for (int m = 1; m <= n; ++m) {
        psi = apply_pair_creation(psi, u);
        for (auto &v : psi)
            v /= static_cast<double>(m);
    }
    double norm = 0.0;
    for (const auto &v : psi)
        norm += std::norm(v);
    if (std::abs(norm - 1.0) > 1e-8)
        throw NumericalError("rotation amplitude recurrence lost normalization");
    return psi;
}

PulseSampler::PulseSampler(const PipelineConfig &config, double phi)
    : eta_(config.detector_efficiency)
{
    config.validate();
    if (const auto *coh = std::get_if<CoherentInput>(&config.input)) {
        (void)coh;
        mode_ = Mode::Coherent;
        PipelineConfig lossless = config;
        lossless.detector_efficiency = 1.0;
        lossless.backend = GaussianBackend{};
        const GaussianState out = build_output_state(lossless, phi);
        for (int i : detector_modes(out, 1))
            mean1_ += std::norm(out.mean()(i));
        for (int i : detector_modes(out, 2))
            mean2_ += std::norm(out.mean()(i));
        return;
    }

    n_bar_ = OpaParams::from_gain(config.gain).n_bar;
    const double phase = phi + config.phase_offset;
    w_ = detector_map(phase);
    const double overlap = config.decoherence ? config.decoherence->overlap : 1.0;
    if (overlap > 0.0 && overlap < 1.0)
        throw InvalidInput("monte carlo supports decoherence overlap 0 or 1 only");

    if (overlap == 0.0) {
        if (config.decoherence->basis == DecoherenceBasis::HV) {
            mode_ = Mode::DecoheredHV;
            p_h_to_1_ = std::norm(w_(0, 0));
        } else {
            mode_ = Mode::DecoheredPM;
        }
        return;
    }

    mode_ = Mode::Schmidt;
    const double x = n_bar_ / (1.0 + n_bar_);
    int cached = 0;
    if (x > 0.0) {
        const double tail_pairs = std::log(kCacheTail) / std::log(x);
        cached = static_cast<int>(std::min<double>(kMaxCachedPairs, std::ceil(tail_pairs)));
    }
    std::vector<cplx> psi{cplx(1.0)};
    cdf_.push_back(outcome_cdf(psi));
    for (int m = 1; m <= cached; ++m) {
        psi = apply_pair_creation(psi, w_);
        for (auto &v : psi)
            v /= static_cast<double>(m);
        cdf_.push_back(outcome_cdf(psi));
    }
}

int PulseSampler::sample_output1_given_pairs(int n, Rng &rng) const
{
    switch (mode_) {
    case Mode::Schmidt:
        if (n < static_cast<int>(cdf_.size()))
            return sample_index(cdf_[static_cast<size_t>(n)], uniform01(rng));
        return sample_index(sector_cdf(n, w_), uniform01(rng));
    case Mode::DecoheredHV:
        return binomial(n, p_h_to_1_, rng) + binomial(n, 1.0 - p_h_to_1_, rng);
    case Mode::DecoheredPM:
        return binomial(2 * n, 0.5, rng);
    case Mode::Coherent:
        break;
    }
    throw InvalidInput("pair sampling requested for coherent input");
}

PhotonCounts PulseSampler::sample_photons(Rng &rng) const
{
    if (mode_ == Mode::Coherent) {
        PhotonCounts c;
        if (mean1_ > 0.0)
            c.output1 = std::poisson_distribution<int>(mean1_)(rng);
        if (mean2_ > 0.0)
            c.output2 = std::poisson_distribution<int>(mean2_)(rng);
        return c;
    }
    if (n_bar_ == 0.0)
        return {};
    const int n = std::geometric_distribution<int>(1.0 / (1.0 + n_bar_))(rng);
    const int k = sample_output1_given_pairs(n, rng);
    return {k, 2 * n - k};
}

ClickOutcome PulseSampler::sample(Rng &rng) const
{
    const PhotonCounts photons = sample_photons(rng);
    ClickOutcome out;
    const int s1 = binomial(photons.output1, eta_, rng);
    if (s1 > 0) {
        const int a = binomial(s1, 1.0 / 3.0, rng);
        const int b = binomial(s1 - a, 0.5, rng);
        out.d1a = a > 0;
        out.d1b = b > 0;
        out.d1c = s1 - a - b > 0;
    }
    out.d2 = binomial(photons.output2, eta_, rng) > 0;
    return out;
}

ClickOutcome sample_pulse(const PipelineConfig &config, double phi, Rng &rng)
{
    return PulseSampler(config, phi).sample(rng);
}

double CountsRow::rate(std::uint64_t count) const
{
    return static_cast<double>(count) / static_cast<double>(shots);
}

double CountsRow::stderr_of(std::uint64_t count) const
{
    const double r = rate(count);
    return std::sqrt(r * (1.0 - r) / static_cast<double>(shots));
}

std::uint64_t CountsRow::count_for(DetectorCombo combo) const
{
    switch (combo) {
    case DetectorCombo::D1A:
        return d1a;
    case DetectorCombo::D1A_D1B:
        return pairs;
    case DetectorCombo::D1A_D1B_D1C:
        return triples;
    case DetectorCombo::D1A_D2:
        return cross_pairs;
    }
    throw InvalidInput("unknown detector combo");
}

CountsTable simulate_counts(const PipelineConfig &config, const std::vector<double> &phi_grid,
                            std::uint64_t shots, std::uint64_t seed, std::uint64_t chunk_size,
                            int threads)
{
    config.validate();
    if (shots < 1)
        throw InvalidInput("shots must be >= 1");
    if (chunk_size < 1)
        throw InvalidInput("chunk size must be >= 1");
    if (phi_grid.empty())
        throw InvalidInput("phase grid is empty");

    std::vector<PulseSampler> samplers;
    samplers.reserve(phi_grid.size());
    for (double phi : phi_grid)
        samplers.emplace_back(config, phi);

    const std::uint64_t chunks = (shots + chunk_size - 1) / chunk_size;
    const std::size_t tasks = phi_grid.size() * chunks;
    std::vector<CountsRow> partial(tasks);

    parallel_for(
        tasks,
        [&](std::size_t task) {
            const std::uint64_t point = task / chunks;
            const std::uint64_t chunk = task % chunks;
            const std::uint64_t begin = chunk * chunk_size;
            const std::uint64_t count = std::min(chunk_size, shots - begin);
            Rng rng(derive_seed(seed, point, chunk));
            const PulseSampler &sampler = samplers[point];
            CountsRow row;
            row.shots = count;
            for (std::uint64_t i = 0; i < count; ++i) {
                const ClickOutcome o = sampler.sample(rng);
                row.d1a += o.d1a;
                row.d1b += o.d1b;
                row.d1c += o.d1c;
                row.d2 += o.d2;
                row.pairs += o.d1a && o.d1b;
                row.cross_pairs += o.d1a && o.d2;
                row.triples += o.d1a && o.d1b && o.d1c;
            }
            partial[task] = row;
        },
        threads);

    CountsTable table;
    table.seed = seed;
    table.chunk_size = chunk_size;
    table.rows.resize(phi_grid.size());
    for (std::size_t p = 0; p < phi_grid.size(); ++p) {
        CountsRow &row = table.rows[p];
        row.phi = phi_grid[p];
        for (std::uint64_t c = 0; c < chunks; ++c) {
            const CountsRow &part = partial[p * chunks + c];
            row.shots += part.shots;
            row.d1a += part.d1a;
            row.d1b += part.d1b;
            row.d1c += part.d1c;
            row.d2 += part.d2;
            row.pairs += part.pairs;
            row.cross_pairs += part.cross_pairs;
            row.triples += part.triples;
        }
    }
    return table;
}

double ClickProbabilities::for_combo(DetectorCombo combo) const
{
    switch (combo) {
    case DetectorCombo::D1A:
        return d1a;
    case DetectorCombo::D1A_D1B:
        return pair;
    case DetectorCombo::D1A_D1B_D1C:
        return triple;
    case DetectorCombo::D1A_D2:
        return cross_pair;
    }
    throw InvalidInput("unknown detector combo");
}

ClickProbabilities exact_click_probabilities(const PipelineConfig &config, double phi)
{
    PipelineConfig lossless = config;
    lossless.detector_efficiency = 1.0;
    lossless.backend = GaussianBackend{};
    const GaussianState out = build_output_state(lossless, phi);
    const std::vector<int> out1 = detector_modes(out, 1);
    const std::vector<int> out2 = detector_modes(out, 2);
    const double eta = config.detector_efficiency;

    return click_probabilities([&](NoClickSet set) {
        GaussianState s = out;
        std::vector<int> watched;
        if (set.t1 > 0.0)
            for (int i : out1) {
                s = apply_loss(s, i, eta * set.t1);
                watched.push_back(i);
            }
        if (set.t2 > 0.0)
            for (int i : out2) {
                s = apply_loss(s, i, eta * set.t2);
                watched.push_back(i);
            }
        return watched.empty() ? 1.0 : vacuum_probability(s, watched);
    });
}

ClickProbabilities click_probabilities_from_pmf(const Eigen::MatrixXd &pmf, double eta)
{
    if (!(eta > 0.0 && eta <= 1.0))
        throw InvalidInput("detector efficiency must lie in (0, 1]");
    return click_probabilities([&](NoClickSet set) {
        const double q1 = 1.0 - eta * set.t1;
        const double q2 = 1.0 - eta * set.t2;
        double total = 0.0;
        for (Eigen::Index i = 0; i < pmf.rows(); ++i)
            for (Eigen::Index j = 0; j < pmf.cols(); ++j)
                if (pmf(i, j) != 0.0)
                    total += pmf(i, j) * std::pow(q1, static_cast<double>(i)) *
                             std::pow(q2, static_cast<double>(j));
        return total;
    });
}

} // namespace sqf
