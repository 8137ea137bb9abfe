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

#include "sqf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqf/analytic.hpp"
#include "sqf/config.hpp"
#include "sqf/fit.hpp"
#include "sqf/io.hpp"
#include "sqf/montecarlo.hpp"
#include "sqf/pipeline.hpp"

#ifndef SQF_VERSION
#define SQF_VERSION "unknown"
#endif

namespace sqf {

using nlohmann::json;

namespace {

constexpr int kSweepGridPoints = 256;

class FitNotConverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config;
    std::string out;
    std::string svg;
    bool quiet = false;
};

struct SweepOptions {
    std::vector<double> gains;
    std::string quantity = "visibility";
    int order = 2;
    double gain_scale = 1.0;
};

struct FitCliOptions {
    std::string kind = "fringe";
    std::string input;
    int order = 2;
    bool weighted = false;
};

json optional_number(const std::optional<double> &v)
{
    return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

// The hash identifies the configuration file; --out/--svg only redirect output.
struct LoadedConfig {
    RunConfig cfg;
    std::string hash;
};

LoadedConfig load_with_overrides(const CommonOptions &opts)
{
    if (opts.config.empty())
        throw ConfigError("--config is required");
    RunConfig cfg = load_run_config(opts.config);
    const std::string hash = config_hash(cfg);
    if (!opts.out.empty())
        cfg.output.path = opts.out;
    if (!opts.svg.empty())
        cfg.output.svg = opts.svg;
    return {std::move(cfg), hash};
}

std::vector<std::pair<std::string, std::string>> base_metadata(const LoadedConfig &loaded,
                                                               const std::string &command)
{
    const RunConfig &cfg = loaded.cfg;
    return {{"command", command},
            {"config_hash", loaded.hash},
            {"backend", backend_tag(cfg.pipeline.backend)},
            {"version", version_string()}};
}

bool full_turn(const PhaseGrid &grid)
{
    return grid.start == 0.0 && std::abs(grid.stop - 2.0 * std::numbers::pi) < 1e-12 && grid.points >= 4;
}

bool covers_period(const PhaseGrid &grid)
{
    return grid.points >= 5 && grid.stop - grid.start >= std::numbers::pi * (1.0 - 1e-9);
}

struct FilePlan {
    std::vector<std::pair<std::string, std::string>> files; // path, content
    void write() const
    {
        for (const auto &[path, content] : files)
            write_file_atomic(path, content);
    }
};

std::string scan_json_text(const FringeScan &scan,
                           const std::vector<std::pair<std::string, std::string>> &meta)
{
    json doc;
    json m = json::object();
    for (const auto &[k, v] : meta)
        m[k] = v;
    doc["metadata"] = m;
    json pts = json::array();
    for (const auto &p : scan.points)
        pts.push_back({{"phi_rad", p.phi}, {"value", p.value}, {"stderr", optional_number(p.stderr_value)}});
    doc["points"] = pts;
    return doc.dump() + "\n";
}

int cmd_fringe(const CommonOptions &opts, std::ostream &out)
{
    const LoadedConfig loaded = load_with_overrides(opts);
    const RunConfig &cfg = loaded.cfg;
    const auto grid = uniform_grid(cfg.grid.start, cfg.grid.stop, cfg.grid.points);
    const FringeScan scan = run_fringe_scan(cfg.pipeline, grid, cfg.combo);
    const bool mc = std::holds_alternative<MonteCarloBackend>(cfg.pipeline.backend);

    json summary{{"command", "fringe"},
                 {"backend", scan.backend},
                 {"combo", combo_name(cfg.combo)},
                 {"points", scan.points.size()},
                 {"config_hash", loaded.hash}};
    if (covers_period(cfg.grid)) {
        const auto vis = visibility_of_scan(scan, mc ? VisibilityMethod::Fit : VisibilityMethod::Extrema);
        summary["visibility"] = vis.value;
        summary["visibility_uncertainty"] = optional_number(vis.uncertainty);
        summary["visibility_method"] = mc ? "fit" : "extrema";
    } else {
        summary["visibility"] = nullptr;
    }
    std::optional<int> harmonic;
    if (full_turn(cfg.grid))
        harmonic = dominant_harmonic(scan);
    summary["harmonic"] = harmonic ? json(*harmonic) : json(nullptr);

    auto meta = base_metadata(loaded, "fringe");
    meta.emplace_back("combo", combo_name(cfg.combo));
    meta.emplace_back("quantity", mc ? "click probability per pulse" : "normal-ordered moment");
    meta.emplace_back("wavelength_nm", format_number(cfg.pipeline.wavelength_nm));
    if (mc)
        meta.emplace_back("fanout", "output 1 split evenly over D1A, D1B, D1C");

    FilePlan plan;
    if (cfg.output.path) {
        if (cfg.output.format == OutputFormat::Json) {
            plan.files.emplace_back(*cfg.output.path, scan_json_text(scan, meta));
        } else {
            CsvTable table;
            table.metadata = meta;
            table.header = {"phi_rad", "value", "stderr"};
            for (const auto &p : scan.points)
                table.rows.push_back({p.phi, p.value, p.stderr_value.value_or(std::nan(""))});
            plan.files.emplace_back(*cfg.output.path, write_csv(table));
        }
    }
    if (cfg.output.svg) {
        PlotSeries s{combo_name(cfg.combo), {}, {}};
        for (const auto &p : scan.points) {
            s.x.push_back(p.phi);
            s.y.push_back(p.value);
        }
        plan.files.emplace_back(*cfg.output.svg,
                                render_svg("Coincidence fringe (" + scan.backend + ")", "phi [rad]",
                                           combo_name(cfg.combo), {s}));
    }
    plan.write();
    if (!opts.quiet)
        out << summary.dump() << "\n";
    return kExitOk;
}

DetectorCombo sweep_combo(const RunConfig &cfg, int order)
{
    if (order == 3)
        return DetectorCombo::D1A_D1B_D1C;
    return cfg.combo == DetectorCombo::D1A_D2 ? DetectorCombo::D1A_D2 : DetectorCombo::D1A_D1B;
}

int cmd_gain_sweep(const CommonOptions &opts, const SweepOptions &sweep, std::ostream &out)
{
    const LoadedConfig loaded = load_with_overrides(opts);
    const RunConfig &cfg = loaded.cfg;
    if (sweep.gains.empty())
        throw InvalidInput("--gains needs at least one value");
    std::set<double> seen;
    for (double g : sweep.gains) {
        if (!std::isfinite(g) || g < 0.0)
            throw InvalidInput("gains must be finite and non-negative");
        if (!seen.insert(g).second)
            throw InvalidInput("gains must be distinct");
    }
    if (sweep.quantity != "visibility" && sweep.quantity != "rate")
        throw InvalidInput("--quantity must be 'visibility' or 'rate'");
    if (sweep.order != 2 && sweep.order != 3)
        throw InvalidInput("--order must be 2 or 3");
    if (!(sweep.gain_scale > 0.0) || !std::isfinite(sweep.gain_scale))
        throw InvalidInput("--gain-scale must be positive");

    const DetectorCombo combo = sweep_combo(cfg, sweep.order);
    const bool mc = std::holds_alternative<MonteCarloBackend>(cfg.pipeline.backend);
    const auto grid = uniform_grid(0.0, 2.0 * std::numbers::pi, kSweepGridPoints);

    CsvTable table;
    table.metadata = base_metadata(loaded, "gain-sweep");
    table.metadata.emplace_back("quantity", sweep.quantity);
    table.metadata.emplace_back("order", std::to_string(sweep.order));
    table.metadata.emplace_back("combo", combo_name(combo));
    table.metadata.emplace_back("gain_scale", format_number(sweep.gain_scale));
    table.metadata.emplace_back("n_bar", "sinh^2(gain_scale * g)");
    if (sweep.quantity == "rate")
        table.metadata.emplace_back("rate_scale", "phase-averaged fringe; R2 = 4 sigma2 value, R3 = 8 sigma3 value");
    table.header = {"g", "n_bar", "value", "stderr"};

    for (double g : sweep.gains) {
        PipelineConfig p = cfg.pipeline;
        p.gain = sweep.gain_scale * g;
        const FringeScan scan = run_fringe_scan(p, grid, combo);
        double value = 0.0;
        double se = std::nan("");
        if (sweep.quantity == "visibility") {
            const auto vis = visibility_of_scan(scan, mc ? VisibilityMethod::Fit : VisibilityMethod::Extrema);
            value = vis.value;
            if (vis.uncertainty)
                se = *vis.uncertainty;
        } else {
            double var = 0.0;
            for (const auto &pt : scan.points) {
                value += pt.value;
                if (pt.stderr_value)
                    var += *pt.stderr_value * *pt.stderr_value;
            }
            const double n = static_cast<double>(scan.points.size());
            value /= n;
            if (mc)
                se = std::sqrt(var) / n;
        }
        table.rows.push_back({g, mean_photons(p.gain), value, se});
    }

    FilePlan plan;
    if (cfg.output.path) {
        if (cfg.output.format == OutputFormat::Json) {
            json doc;
            json m = json::object();
            for (const auto &[k, v] : table.metadata)
                m[k] = v;
            doc["metadata"] = m;
            json rows = json::array();
            for (const auto &r : table.rows)
                rows.push_back({{"g", r[0]}, {"n_bar", r[1]}, {"value", r[2]}, {"stderr", optional_number(r[3])}});
            doc["rows"] = rows;
            plan.files.emplace_back(*cfg.output.path, doc.dump() + "\n");
        } else {
            plan.files.emplace_back(*cfg.output.path, write_csv(table));
        }
    }
    if (cfg.output.svg) {
        PlotSeries s{sweep.quantity, {}, {}};
        for (const auto &r : table.rows) {
            s.x.push_back(r[0]);
            s.y.push_back(r[2]);
        }
        plan.files.emplace_back(*cfg.output.svg,
                                render_svg("Gain sweep", "g", sweep.quantity, {s}));
    }
    plan.write();

    if (!opts.quiet) {
        json values = json::array();
        for (const auto &r : table.rows)
            values.push_back(r[2]);
        json summary{{"command", "gain-sweep"},
                     {"quantity", sweep.quantity},
                     {"order", sweep.order},
                     {"combo", combo_name(combo)},
                     {"gains", sweep.gains},
                     {"values", values},
                     {"config_hash", loaded.hash}};
        out << summary.dump() << "\n";
    }
    return kExitOk;
}

json fit_json(const FitResult &fit, const std::string &kind, size_t points)
{
    json params = json::object();
    json errs = json::object();
    for (size_t i = 0; i < fit.names.size(); ++i) {
        params[fit.names[i]] = fit.parameters(static_cast<Eigen::Index>(i));
        errs[fit.names[i]] = optional_number(fit.stderr_of(fit.names[i]));
    }
    json cov = json::array();
    for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < fit.covariance.cols(); ++j)
            row.push_back(optional_number(fit.covariance(i, j)));
        cov.push_back(row);
    }
    json derived = json::object();
    for (const auto &[k, v] : fit.derived)
        derived[k] = optional_number(v);
    return json{{"command", "fit"},
                {"kind", kind},
                {"points", points},
                {"converged", fit.converged},
                {"iterations", fit.iterations},
                {"message", fit.message},
                {"residual_norm", fit.residual_norm},
                {"parameters", params},
                {"stderr", errs},
                {"covariance", cov},
                {"derived", derived},
                {"flags", fit.flags}};
}

int cmd_fit(const CommonOptions &opts, const FitCliOptions &fo, std::ostream &out)
{
    if (fo.input.empty())
        throw InvalidInput("--input is required");
    if (fo.kind != "fringe" && fo.kind != "visibility_gain" && fo.kind != "rate_gain")
        throw InvalidInput("--kind must be fringe, visibility_gain or rate_gain");
    const CsvTable table = read_csv_file(fo.input);
    const std::string x_name = fo.kind == "fringe" ? "phi_rad" : "g";
    const int xc = table.column(x_name);
    const int yc = table.column("value");
    if (xc < 0 || yc < 0)
        throw CsvError("input needs columns '" + x_name + "' and 'value'");
    const int sc = table.column("stderr");
    if (fo.weighted && sc < 0)
        throw CsvError("--weighted needs a 'stderr' column");

    std::vector<WeightedPoint> points;
    for (const auto &row : table.rows) {
        WeightedPoint p{row[static_cast<size_t>(xc)], row[static_cast<size_t>(yc)], 1.0};
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw CsvError("missing value in column '" + x_name + "' or 'value'");
        if (fo.weighted) {
            const double s = row[static_cast<size_t>(sc)];
            if (!(s > 0.0) || !std::isfinite(s))
                throw CsvError("stderr must be positive for weighted fits");
            p.weight = 1.0 / (s * s);
        }
        points.push_back(p);
    }

    FitOptions options;
    options.scale_covariance = !fo.weighted;
    FitResult fit;
    if (fo.kind == "fringe")
        fit = fit_fringe(points, options);
    else if (fo.kind == "visibility_gain")
        fit = fit_visibility_vs_gain(points, options);
    else
        fit = fit_rate_vs_gain(points, fo.order, options);

    json doc = fit_json(fit, fo.kind, points.size());
    if (fo.kind == "rate_gain")
        doc["order"] = fo.order;
    if (!opts.out.empty())
        write_file_atomic(opts.out, doc.dump() + "\n");
    if (!opts.quiet)
        out << doc.dump() << "\n";
    if (!fit.converged)
        throw FitNotConverged(fit.message);
    return kExitOk;
}

int cmd_montecarlo(const CommonOptions &opts, std::ostream &out)
{
    const LoadedConfig loaded = load_with_overrides(opts);
    const RunConfig &cfg = loaded.cfg;
    const auto *mcb = std::get_if<MonteCarloBackend>(&cfg.pipeline.backend);
    if (!mcb)
        throw ConfigError("montecarlo command needs a montecarlo backend");
    const auto grid = uniform_grid(cfg.grid.start, cfg.grid.stop, cfg.grid.points);
    const CountsTable counts = simulate_counts(cfg.pipeline, grid, mcb->shots, mcb->seed);

    CsvTable table;
    table.metadata = base_metadata(loaded, "montecarlo");
    table.metadata.emplace_back("rng", counts.rng_algorithm);
    table.metadata.emplace_back("seed", std::to_string(counts.seed));
    table.metadata.emplace_back("chunk_size", std::to_string(counts.chunk_size));
    table.metadata.emplace_back("fanout", "output 1 split evenly over D1A, D1B, D1C; output 2 on D2");
    table.header = {"phi_rad",      "shots",       "singles_1",   "singles_1b", "singles_1c",
                    "singles_2",    "pairs",       "cross_pairs", "triples",    "pair_rate",
                    "pair_stderr",  "cross_rate",  "cross_stderr", "triple_rate", "triple_stderr"};
    for (const auto &r : counts.rows) {
        auto d = [](std::uint64_t v) { return static_cast<double>(v); };
        table.rows.push_back({r.phi, d(r.shots), d(r.d1a), d(r.d1b), d(r.d1c), d(r.d2), d(r.pairs),
                              d(r.cross_pairs), d(r.triples), r.rate(r.pairs), r.stderr_of(r.pairs),
                              r.rate(r.cross_pairs), r.stderr_of(r.cross_pairs), r.rate(r.triples),
                              r.stderr_of(r.triples)});
    }

    json summary{{"command", "montecarlo"},
                 {"backend", "montecarlo"},
                 {"combo", combo_name(cfg.combo)},
                 {"shots", mcb->shots},
                 {"seed", mcb->seed},
                 {"points", counts.rows.size()},
                 {"config_hash", loaded.hash}};
    if (covers_period(cfg.grid)) {
        FringeScan scan;
        scan.combo = cfg.combo;
        for (const auto &r : counts.rows) {
            const auto c = r.count_for(cfg.combo);
            scan.points.push_back({r.phi, r.rate(c), r.stderr_of(c)});
        }
        const auto vis = visibility_of_scan(scan, VisibilityMethod::Fit);
        summary["visibility"] = vis.value;
        summary["visibility_uncertainty"] = optional_number(vis.uncertainty);
    }

    FilePlan plan;
    if (cfg.output.path) {
        if (cfg.output.format == OutputFormat::Json) {
            json doc;
            json m = json::object();
            for (const auto &[k, v] : table.metadata)
                m[k] = v;
            doc["metadata"] = m;
            json rows = json::array();
            for (const auto &row : table.rows) {
                json o = json::object();
                for (size_t i = 0; i < row.size(); ++i)
                    o[table.header[i]] = row[i];
                rows.push_back(o);
            }
            doc["rows"] = rows;
            plan.files.emplace_back(*cfg.output.path, doc.dump() + "\n");
        } else {
            plan.files.emplace_back(*cfg.output.path, write_csv(table));
        }
    }
    if (cfg.output.svg) {
        std::vector<PlotSeries> series(2);
        series[0].name = "pair_rate";
        series[1].name = "cross_rate";
        for (const auto &row : table.rows) {
            series[0].x.push_back(row[0]);
            series[0].y.push_back(row[9]);
            series[1].x.push_back(row[0]);
            series[1].y.push_back(row[11]);
        }
        plan.files.emplace_back(*cfg.output.svg, render_svg("Monte Carlo click rates", "phi [rad]",
                                                            "clicks per pulse", series));
    }
    plan.write();
    if (!opts.quiet)
        out << summary.dump() << "\n";
    return kExitOk;
}

void add_common(CLI::App *cmd, CommonOptions &opts, bool needs_config)
{
    auto *c = cmd->add_option("--config", opts.config, "run configuration (JSON)");
    if (needs_config)
        c->required();
    cmd->add_option("--out", opts.out, "data output path (overrides output.path)");
    cmd->add_option("--svg", opts.svg, "SVG plot path (overrides output.svg)");
    cmd->add_flag("--quiet", opts.quiet, "suppress the JSON summary on stdout");
}

} // namespace

std::string version_string() { return SQF_VERSION; }

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"sqf: sub-Rayleigh fringe simulator for an unseeded parametric amplifier", "sqf"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    CommonOptions common;
    SweepOptions sweep;
    FitCliOptions fo;

    auto *fringe = app.add_subcommand("fringe", "phase scan of one detector combination");
    add_common(fringe, common, true);

    auto *gain = app.add_subcommand("gain-sweep", "visibility or rate versus gain");
    add_common(gain, common, true);
    gain->add_option("--gains", sweep.gains, "comma-separated gains")->delimiter(',')->required();
    gain->add_option("--quantity", sweep.quantity, "visibility | rate");
    gain->add_option("--order", sweep.order, "coincidence order (2 or 3)");
    gain->add_option("--gain-scale", sweep.gain_scale, "evaluate at gain_scale * g");

    auto *fit = app.add_subcommand("fit", "fit a CSV produced by fringe or gain-sweep");
    add_common(fit, common, false);
    fit->add_option("--kind", fo.kind, "fringe | visibility_gain | rate_gain");
    fit->add_option("--input", fo.input, "input CSV")->required();
    fit->add_option("--order", fo.order, "rate law order (2 or 3)");
    fit->add_flag("--weighted", fo.weighted, "weight points by 1/stderr^2");

    auto *mc = app.add_subcommand("montecarlo", "pulse-by-pulse click simulation");
    add_common(mc, common, true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion &) {
        out << version_string() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "sqf: " << e.what() << "\n";
        return kExitInvalid;
    }

    try {
        if (*fringe)
            return cmd_fringe(common, out);
        if (*gain)
            return cmd_gain_sweep(common, sweep, out);
        if (*fit)
            return cmd_fit(common, fo, out);
        return cmd_montecarlo(common, out);
    } catch (const FitNotConverged &e) {
        err << "sqf: fit did not converge: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const InvalidInput &e) {
        err << "sqf: invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const NumericalError &e) {
        err << "sqf: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception &e) {
        err << "sqf: " << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace sqf
