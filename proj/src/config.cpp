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

#include "sqf/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace sqf {

using nlohmann::json;

namespace {

void only_keys(const json &obj, const std::string &where, std::initializer_list<const char *> allowed)
{
    if (!obj.is_object())
        throw ConfigError(where + " must be an object");
    for (const auto &item : obj.items()) {
        bool ok = false;
        for (const char *k : allowed)
            ok = ok || item.key() == k;
        if (!ok)
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

double number(const json &obj, const char *key, const std::string &where)
{
    const json &v = obj.at(key);
    if (!v.is_number())
        throw ConfigError(where + "." + key + " must be a number");
    return v.get<double>();
}

double number_or(const json &obj, const char *key, double fallback, const std::string &where)
{
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

std::uint64_t unsigned_integer(const json &obj, const char *key, const std::string &where)
{
    const json &v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(where + "." + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string text(const json &obj, const char *key, const std::string &where)
{
    const json &v = obj.at(key);
    if (!v.is_string())
        throw ConfigError(where + "." + key + " must be a string");
    return v.get<std::string>();
}

SourceInput parse_input(const json &j)
{
    only_keys(j, "input", {"type", "alpha_re", "alpha_im", "pol"});
    if (!j.contains("type"))
        throw ConfigError("input.type is required");
    const std::string type = text(j, "type", "input");
    if (type == "vacuum") {
        if (j.size() != 1)
            throw ConfigError("vacuum input takes no parameters");
        return VacuumInput{};
    }
    if (type != "coherent")
        throw ConfigError("input.type must be 'vacuum' or 'coherent'");
    CoherentInput in;
    in.alpha = cplx(number_or(j, "alpha_re", 1.0, "input"), number_or(j, "alpha_im", 0.0, "input"));
    const std::string pol = j.contains("pol") ? text(j, "pol", "input") : "H";
    if (pol == "H")
        in.pol = Polarization::H;
    else if (pol == "V")
        in.pol = Polarization::V;
    else
        throw ConfigError("input.pol must be 'H' or 'V'");
    return in;
}

Backend parse_backend(const json &j)
{
    if (j.is_string()) {
        if (j.get<std::string>() == "gaussian")
            return GaussianBackend{};
        throw ConfigError("backend string must be 'gaussian'");
    }
    only_keys(j, "backend", {"fock", "montecarlo"});
    if (j.size() != 1)
        throw ConfigError("backend must name exactly one engine");
    if (j.contains("fock")) {
        const json &f = j.at("fock");
        only_keys(f, "backend.fock", {"cutoff"});
        FockBackend b;
        if (f.contains("cutoff")) {
            const auto c = unsigned_integer(f, "cutoff", "backend.fock");
            if (c > 4000)
                throw ConfigError("backend.fock.cutoff is too large");
            b.cutoff = static_cast<int>(c);
        }
        return b;
    }
    const json &m = j.at("montecarlo");
    only_keys(m, "backend.montecarlo", {"shots", "seed"});
    MonteCarloBackend b;
    if (m.contains("shots"))
        b.shots = unsigned_integer(m, "shots", "backend.montecarlo");
    if (m.contains("seed"))
        b.seed = unsigned_integer(m, "seed", "backend.montecarlo");
    return b;
}

json backend_json(const Backend &backend)
{
    if (const auto *f = std::get_if<FockBackend>(&backend))
        return json{{"fock", {{"cutoff", f->cutoff}}}};
    if (const auto *m = std::get_if<MonteCarloBackend>(&backend))
        return json{{"montecarlo", {{"shots", m->shots}, {"seed", m->seed}}}};
    return "gaussian";
}

} // namespace

RunConfig parse_run_config(const json &doc)
{
    only_keys(doc, "config", {"gain", "input", "phase_grid", "decoherence", "phase_offset", "detectors",
                              "backend", "output", "wavelength_nm"});
    if (!doc.contains("gain"))
        throw ConfigError("config.gain is required");

    RunConfig cfg;
    PipelineConfig &p = cfg.pipeline;
    p.gain = number(doc, "gain", "config");
    if (doc.contains("input"))
        p.input = parse_input(doc.at("input"));
    if (doc.contains("decoherence") && !doc.at("decoherence").is_null()) {
        const json &d = doc.at("decoherence");
        only_keys(d, "decoherence", {"basis", "overlap"});
        Decoherence dec;
        const std::string basis = d.contains("basis") ? text(d, "basis", "decoherence") : "HV";
        if (basis == "HV")
            dec.basis = DecoherenceBasis::HV;
        else if (basis == "PM")
            dec.basis = DecoherenceBasis::PM;
        else
            throw ConfigError("decoherence.basis must be 'HV' or 'PM'");
        dec.overlap = number_or(d, "overlap", 0.0, "decoherence");
        p.decoherence = dec;
    }
    p.phase_offset = number_or(doc, "phase_offset", 0.0, "config");
    p.wavelength_nm = number_or(doc, "wavelength_nm", 795.0, "config");
    if (doc.contains("detectors")) {
        const json &d = doc.at("detectors");
        only_keys(d, "detectors", {"efficiency", "combo"});
        p.detector_efficiency = number_or(d, "efficiency", 1.0, "detectors");
        if (d.contains("combo")) {
            try {
                cfg.combo = combo_from_name(text(d, "combo", "detectors"));
            } catch (const ConfigError &) {
                throw;
            } catch (const InvalidInput &e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (doc.contains("backend"))
        p.backend = parse_backend(doc.at("backend"));

    if (doc.contains("phase_grid")) {
        const json &g = doc.at("phase_grid");
        only_keys(g, "phase_grid", {"start", "stop", "points"});
        cfg.grid.start = number_or(g, "start", cfg.grid.start, "phase_grid");
        cfg.grid.stop = number_or(g, "stop", cfg.grid.stop, "phase_grid");
        if (g.contains("points")) {
            const auto n = unsigned_integer(g, "points", "phase_grid");
            if (n < 1 || n > 1000000)
                throw ConfigError("phase_grid.points must lie in [1, 1e6]");
            cfg.grid.points = static_cast<int>(n);
        }
        if (!(cfg.grid.stop > cfg.grid.start))
            throw ConfigError("phase_grid.stop must exceed phase_grid.start");
    }

    if (doc.contains("output")) {
        const json &o = doc.at("output");
        only_keys(o, "output", {"format", "path", "svg"});
        if (o.contains("format")) {
            const std::string f = text(o, "format", "output");
            if (f == "csv")
                cfg.output.format = OutputFormat::Csv;
            else if (f == "json")
                cfg.output.format = OutputFormat::Json;
            else
                throw ConfigError("output.format must be 'csv' or 'json'");
        }
        if (o.contains("path") && !o.at("path").is_null())
            cfg.output.path = text(o, "path", "output");
        if (o.contains("svg") && !o.at("svg").is_null())
            cfg.output.svg = text(o, "svg", "output");
    }

    try {
        p.validate();
    } catch (const InvalidInput &e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception &e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

json canonical_json(const RunConfig &config)
{
    const PipelineConfig &p = config.pipeline;
    json j;
    j["gain"] = p.gain;
    if (const auto *c = std::get_if<CoherentInput>(&p.input))
        j["input"] = {{"type", "coherent"},
                      {"alpha_re", c->alpha.real()},
                      {"alpha_im", c->alpha.imag()},
                      {"pol", c->pol == Polarization::V ? "V" : "H"}};
    else
        j["input"] = {{"type", "vacuum"}};
    j["phase_grid"] = {{"start", config.grid.start}, {"stop", config.grid.stop}, {"points", config.grid.points}};
    if (p.decoherence)
        j["decoherence"] = {{"basis", p.decoherence->basis == DecoherenceBasis::PM ? "PM" : "HV"},
                            {"overlap", p.decoherence->overlap}};
    else
        j["decoherence"] = nullptr;
    j["phase_offset"] = p.phase_offset;
    j["wavelength_nm"] = p.wavelength_nm;
    j["detectors"] = {{"efficiency", p.detector_efficiency}, {"combo", combo_name(config.combo)}};
    j["backend"] = backend_json(p.backend);
    json out = {{"format", config.output.format == OutputFormat::Json ? "json" : "csv"}};
    out["path"] = config.output.path ? json(*config.output.path) : json(nullptr);
    out["svg"] = config.output.svg ? json(*config.output.svg) : json(nullptr);
    j["output"] = out;
    return j;
}

std::uint64_t fnv1a64(const std::string &text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const RunConfig &config)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_json(config).dump())));
    return buf;
}

} // namespace sqf
