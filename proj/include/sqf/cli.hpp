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

#include <ostream>
#include <string>
#include <vector>

namespace sqf {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1, // I/O or unexpected failure
    kExitInvalid = 2, // config, schema, CSV or usage error
    kExitNumerical = 3,
    kExitNoConvergence = 4,
};

/// Build identifier recorded in every output file.
std::string version_string();

/**
 * Runs the command-line front end in-process.
 *
 * args excludes the program name, e.g. {"fringe", "--config", "run.json"}.
 * Summaries go to out as single-line JSON, diagnostics to err.
 */
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace sqf
