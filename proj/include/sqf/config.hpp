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

#include <json.hpp>

#include "sqf/pipeline.hpp"

namespace sqf {

/// Schema or file-level problem with a run configuration.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

struct PhaseGrid {
    double start = 0.0;
    double stop = 6.283185307179586;
    int points = 64;
};

enum class OutputFormat { Csv, Json };

struct OutputSpec {
    OutputFormat format = OutputFormat::Csv;
    std::optional<std::string> path;
    std::optional<std::string> svg;
};

/// A parsed and validated run configuration file.
struct RunConfig {
    PipelineConfig pipeline;
    PhaseGrid grid;
    DetectorCombo combo = DetectorCombo::D1A_D1B;
    OutputSpec output;
};

/**
 * Strict parse: unknown keys, wrong types and out-of-range values raise
 * ConfigError. Only "gain" is mandatory; every other section has a default.
 */
RunConfig parse_run_config(const nlohmann::json &doc);
RunConfig load_run_config(const std::string &path);

/// The configuration with all defaults filled in, keys sorted.
nlohmann::json canonical_json(const RunConfig &config);

/// FNV-1a 64 of the canonical JSON text, as 16 lowercase hex digits.
std::string config_hash(const RunConfig &config);

std::uint64_t fnv1a64(const std::string &text);

} // namespace sqf
