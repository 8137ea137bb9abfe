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

#include <string>
#include <utility>
#include <vector>

#include "sqf/errors.hpp"

namespace sqf {

class CsvError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// 17 significant digits, enough to round-trip any double.
std::string format_number(double value);

/**
 * Comma-separated table with '#'-prefixed "key: value" metadata lines and a
 * mandatory header row. Missing values are NaN and are written as empty cells.
 */
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a named column or -1.
    int column(const std::string &name) const;
    const std::string *meta(const std::string &key) const;
};

std::string write_csv(const CsvTable &table);
CsvTable parse_csv(const std::string &text);
CsvTable read_csv_file(const std::string &path);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::string &path, const std::string &content);

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Standalone SVG line plot: one polyline per series, labelled axes and ticks.
std::string render_svg(const std::string &title, const std::string &x_label, const std::string &y_label,
                       const std::vector<PlotSeries> &series);

} // namespace sqf
