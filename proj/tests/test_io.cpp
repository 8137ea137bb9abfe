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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include "sqf/config.hpp"
#include "sqf/io.hpp"

using namespace sqf;
using nlohmann::json;

namespace {

json base_config()
{
    return json::parse(R"({
        "gain": 1.4,
        "input": {"type": "vacuum"},
        "phase_grid": {"start": 0, "stop": 3.141592653589793, "points": 32},
        "decoherence": null,
        "phase_offset": 0.1,
        "detectors": {"efficiency": 0.5, "combo": "D1A_D2"},
        "backend": "gaussian",
        "output": {"format": "csv", "path": "out.csv"}
    })");
}

std::filesystem::path scratch_dir(const std::string &name)
{
    auto dir = std::filesystem::temp_directory_path() / ("sqf_io_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

size_t count_of(const std::string &text, const std::string &needle)
{
    size_t n = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
        ++n;
    return n;
}

} // namespace

TEST_CASE("numbers round-trip through csv text")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    CsvTable t;
    t.header = {"a", "b", "c"};
    for (int i = 0; i < 500; ++i)
        t.rows.push_back({std::ldexp(mant(rng), expo(rng) / 4), mant(rng) * 1e-310, std::nextafter(1.0, 2.0)});
    t.rows.push_back({0.0, -0.0, std::numeric_limits<double>::max()});
    t.rows.push_back({std::numeric_limits<double>::denorm_min(), 1.0 / 3.0, std::nan("")});
    const CsvTable back = parse_csv(write_csv(t));
    REQUIRE(back.rows.size() == t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i)
        for (size_t j = 0; j < 3; ++j) {
            const double a = t.rows[i][j];
            const double b = back.rows[i][j];
            if (std::isnan(a))
                CHECK(std::isnan(b));
            else
                CHECK(a == b);
        }
    CHECK(format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("csv metadata and header")
{
    CsvTable t;
    t.metadata = {{"config_hash", "0123456789abcdef"}, {"backend", "gaussian"}};
    t.header = {"phi_rad", "value", "stderr"};
    t.rows = {{0.0, 1.5, std::nan("")}, {0.5, 2.5, 0.1}};
    const std::string text = write_csv(t);
    CHECK(text.rfind("# config_hash: 0123456789abcdef\n", 0) == 0);
    CHECK(text.find("phi_rad,value,stderr\n") != std::string::npos);
    const CsvTable back = parse_csv(text);
    REQUIRE(back.meta("backend") != nullptr);
    CHECK(*back.meta("backend") == "gaussian");
    CHECK(back.meta("missing") == nullptr);
    CHECK(back.column("value") == 1);
    CHECK(back.column("nope") == -1);
}

TEST_CASE("malformed csv is rejected")
{
    CHECK_THROWS_AS(parse_csv(""), CsvError);
    CHECK_THROWS_AS(parse_csv("# only: metadata\n"), CsvError);
    CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), CsvError);
    CHECK_THROWS_AS(parse_csv("a,b\n1,abc\n"), CsvError);
    CHECK_THROWS_AS(read_csv_file("/nonexistent/sqf.csv"), InvalidInput);
    CHECK(parse_csv("a,b\r\n1,2\r\n").rows.at(0).at(1) == 2.0);
}

TEST_CASE("atomic file writes")
{
    const auto dir = scratch_dir("atomic");
    const auto path = (dir / "data.csv").string();
    write_file_atomic(path, "first\n");
    write_file_atomic(path, "second\n");
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "second\n");
    size_t entries = 0;
    for ([[maybe_unused]] const auto &e : std::filesystem::directory_iterator(dir))
        ++entries;
    CHECK(entries == 1);
    CHECK_THROWS(write_file_atomic((dir / "missing" / "x.csv").string(), "x"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("config parsing")
{
    const RunConfig cfg = parse_run_config(base_config());
    CHECK(cfg.pipeline.gain == 1.4);
    CHECK(cfg.combo == DetectorCombo::D1A_D2);
    CHECK(cfg.grid.points == 32);
    CHECK(cfg.pipeline.phase_offset == 0.1);
    CHECK(cfg.pipeline.detector_efficiency == 0.5);
    CHECK(cfg.output.path.value() == "out.csv");
    CHECK_FALSE(cfg.output.svg.has_value());

    json mc = base_config();
    mc["backend"] = json::parse(R"({"montecarlo": {"shots": 1000, "seed": 42}})");
    const auto m = std::get<MonteCarloBackend>(parse_run_config(mc).pipeline.backend);
    CHECK(m.shots == 1000);
    CHECK(m.seed == 42);

    json fock = base_config();
    fock["backend"] = json::parse(R"({"fock": {"cutoff": 60}})");
    CHECK(std::get<FockBackend>(parse_run_config(fock).pipeline.backend).cutoff == 60);

    json coh = base_config();
    coh["gain"] = 0.0;
    coh["input"] = json::parse(R"({"type": "coherent", "alpha_re": 1.0, "alpha_im": 0.5, "pol": "V"})");
    const auto c = std::get<CoherentInput>(parse_run_config(coh).pipeline.input);
    CHECK(c.alpha == cplx(1.0, 0.5));
    CHECK(c.pol == Polarization::V);

    json dec = base_config();
    dec["decoherence"] = json::parse(R"({"basis": "PM", "overlap": 0.25})");
    const auto d = parse_run_config(dec).pipeline.decoherence.value();
    CHECK(d.basis == DecoherenceBasis::PM);
    CHECK(d.overlap == 0.25);
}

TEST_CASE("config schema is strict")
{
    auto expect_error = [](const json &doc) { CHECK_THROWS_AS(parse_run_config(doc), ConfigError); };
    json j = base_config();
    j["gian"] = 1.0;
    expect_error(j);
    j = base_config();
    j["detectors"]["threshold"] = 1;
    expect_error(j);
    j = base_config();
    j.erase("gain");
    expect_error(j);
    j = base_config();
    j["gain"] = -0.5;
    expect_error(j);
    j = base_config();
    j["gain"] = "1.4";
    expect_error(j);
    j = base_config();
    j["backend"] = "qutip";
    expect_error(j);
    j = base_config();
    j["backend"] = json::parse(R"({"montecarlo": {"shots": 0, "seed": 1}})");
    expect_error(j);
    j = base_config();
    j["backend"] = json::parse(R"({"montecarlo": {"shots": 10, "seed": -1}})");
    expect_error(j);
    j = base_config();
    j["detectors"]["combo"] = "D1B";
    expect_error(j);
    j = base_config();
    j["detectors"]["efficiency"] = 0.0;
    expect_error(j);
    j = base_config();
    j["phase_grid"]["points"] = 0;
    expect_error(j);
    j = base_config();
    j["decoherence"] = json::parse(R"({"basis": "HV", "overlap": 1.5})");
    expect_error(j);
    j = base_config();
    j["output"]["format"] = "xml";
    expect_error(j);
    j = base_config();
    j["input"] = json::parse(R"({"type": "coherent", "alpha_re": 1.0})");
    expect_error(j); // coherent seed with nonzero gain
    CHECK_THROWS_AS(parse_run_config(json::array()), ConfigError);
}

TEST_CASE("config file loading")
{
    const auto dir = scratch_dir("load");
    const auto good = (dir / "good.json").string();
    std::ofstream(good) << base_config().dump(2);
    CHECK(load_run_config(good).pipeline.gain == 1.4);
    const auto bad = (dir / "bad.json").string();
    std::ofstream(bad) << "{\"gain\": 1.4,";
    CHECK_THROWS_AS(load_run_config(bad), ConfigError);
    CHECK_THROWS_AS(load_run_config((dir / "absent.json").string()), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config hash")
{
    const RunConfig a = parse_run_config(base_config());
    const RunConfig b = parse_run_config(base_config());
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a).find_first_not_of("0123456789abcdef") == std::string::npos);

    // Spelling out a default leaves the configuration, and its hash, unchanged.
    json explicit_default = base_config();
    explicit_default["wavelength_nm"] = 795.0;
    CHECK(config_hash(parse_run_config(explicit_default)) == config_hash(a));

    std::vector<json> variants;
    auto vary = [&](auto edit) {
        json j = base_config();
        edit(j);
        variants.push_back(j);
    };
    vary([](json &j) { j["gain"] = 1.41; });
    vary([](json &j) { j["phase_offset"] = 0.2; });
    vary([](json &j) { j["phase_grid"]["points"] = 33; });
    vary([](json &j) { j["phase_grid"]["stop"] = 6.0; });
    vary([](json &j) { j["detectors"]["efficiency"] = 0.6; });
    vary([](json &j) { j["detectors"]["combo"] = "D1A_D1B"; });
    vary([](json &j) { j["decoherence"] = json::parse(R"({"basis": "HV", "overlap": 0})"); });
    vary([](json &j) { j["backend"] = json::parse(R"({"fock": {"cutoff": 50}})"); });
    vary([](json &j) { j["output"]["path"] = "other.csv"; });
    vary([](json &j) { j["output"]["svg"] = "plot.svg"; });
    vary([](json &j) { j["wavelength_nm"] = 800.0; });
    std::set<std::string> hashes{config_hash(a)};
    for (const auto &v : variants)
        hashes.insert(config_hash(parse_run_config(v)));
    CHECK(hashes.size() == variants.size() + 1);

    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("svg plot")
{
    PlotSeries s1{"first", {0.0, 1.0, 2.0}, {1.0, 3.0, 2.0}};
    PlotSeries s2{"second & more", {0.0, 1.0, 2.0}, {0.5, 0.25, 4.0}};
    const std::string svg = render_svg("Title <x>", "phi [rad]", "value", {s1, s2});
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(count_of(svg, "<polyline") == 2);
    CHECK(count_of(svg, "<svg") == 1);
    CHECK(count_of(svg, "</svg>") == 1);
    CHECK(svg.find("phi [rad]") != std::string::npos);
    CHECK(svg.find("Title &lt;x&gt;") != std::string::npos);
    CHECK(svg.find("second &amp; more") != std::string::npos);
    CHECK(svg.find("<x>") == std::string::npos);

    // Balanced tags: every opened element is closed or self-closing.
    size_t open = 0, close = 0, self = 0;
    for (size_t pos = svg.find('<'); pos != std::string::npos; pos = svg.find('<', pos + 1)) {
        const size_t end = svg.find('>', pos);
        REQUIRE(end != std::string::npos);
        const std::string tag = svg.substr(pos, end - pos + 1);
        if (tag.rfind("<?", 0) == 0 || tag.rfind("<!", 0) == 0)
            continue;
        if (tag.rfind("</", 0) == 0)
            ++close;
        else if (tag.size() >= 2 && tag[tag.size() - 2] == '/')
            ++self;
        else
            ++open;
    }
    CHECK(open == close);
    CHECK(self >= 2);
}
