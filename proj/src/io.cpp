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

#include "sqf/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

namespace sqf {

namespace {

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

double parse_cell(const std::string &cell, size_t line_no)
{
    if (cell.empty())
        return std::numeric_limits<double>::quiet_NaN();
    errno = 0;
    char *end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    // Underflow to a subnormal is a faithful parse; only overflow is an error.
    if (end != cell.c_str() + cell.size() || (errno == ERANGE && std::isinf(v)))
        throw CsvError("line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
    return v;
}

std::string xml_escape(const std::string &s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits = 2)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

std::string format_number(double value)
{
    if (std::isnan(value))
        return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

int CsvTable::column(const std::string &name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

const std::string *CsvTable::meta(const std::string &key) const
{
    for (const auto &kv : metadata)
        if (kv.first == key)
            return &kv.second;
    return nullptr;
}

std::string write_csv(const CsvTable &table)
{
    if (table.header.empty())
        throw CsvError("csv header is empty");
    std::string out;
    for (const auto &[key, value] : table.metadata)
        out += "# " + key + ": " + value + "\n";
    for (size_t i = 0; i < table.header.size(); ++i)
        out += (i ? "," : "") + table.header[i];
    out += "\n";
    for (const auto &row : table.rows) {
        if (row.size() != table.header.size())
            throw CsvError("csv row width does not match the header");
        for (size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + format_number(row[i]);
        out += "\n";
    }
    return out;
}

CsvTable parse_csv(const std::string &text)
{
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        if (line.front() == '#') {
            const std::string body = trim(line.substr(1));
            const auto colon = body.find(':');
            if (colon == std::string::npos)
                table.metadata.emplace_back(body, "");
            else
                table.metadata.emplace_back(trim(body.substr(0, colon)), trim(body.substr(colon + 1)));
            continue;
        }
        if (!have_header) {
            table.header = split(line);
            for (const auto &h : table.header)
                if (h.empty())
                    throw CsvError("line " + std::to_string(line_no) + ": empty column name");
            have_header = true;
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != table.header.size())
            throw CsvError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(table.header.size()) + " fields, got " +
                           std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto &c : cells)
            row.push_back(parse_cell(c, line_no));
        table.rows.push_back(std::move(row));
    }
    if (!have_header)
        throw CsvError("csv has no header row");
    return table;
}

CsvTable read_csv_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CsvError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

void write_file_atomic(const std::string &path, const std::string &content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot move output into '" + path + "'");
    }
}

std::string render_svg(const std::string &title, const std::string &x_label, const std::string &y_label,
                       const std::vector<PlotSeries> &series)
{
    constexpr double width = 640.0;
    constexpr double height = 420.0;
    constexpr double left = 80.0;
    constexpr double right = 20.0;
    constexpr double top = 40.0;
    constexpr double bottom = 60.0;
    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -x0;
    double y0 = x0;
    double y1 = -x0;
    for (const auto &s : series) {
        if (s.x.size() != s.y.size())
            throw InvalidInput("plot series '" + s.name + "' has mismatched lengths");
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!(x1 >= x0)) {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if (x1 == x0)
        x1 = x0 + 1.0;
    if (y1 == y0) {
        const double pad = y0 == 0.0 ? 1.0 : 0.05 * std::abs(y0);
        y0 -= pad;
        y1 += pad;
    }
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << xml_escape(title) << "</text>\n"
        << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
        << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
        << top + ph << "\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
        << "\"/>\n</g>\n";

    svg << "<g class=\"ticks\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0;
        const double yv = y0 + (y1 - y0) * i / 4.0;
        svg << "<text x=\"" << fixed(sx(xv)) << "\" y=\"" << top + ph + 18
            << "\" text-anchor=\"middle\">" << format_number(xv).substr(0, 8) << "</text>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << fixed(sy(yv) + 4)
            << "\" text-anchor=\"end\">" << format_number(yv).substr(0, 8) << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<text class=\"xlabel\" x=\"" << left + pw / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(x_label) << "</text>\n";
    svg << "<text class=\"ylabel\" x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << top + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

    for (size_t k = 0; k < series.size(); ++k) {
        const auto &s = series[k];
        svg << "<polyline class=\"series\" data-name=\"" << xml_escape(s.name) << "\" fill=\"none\" stroke=\""
            << colors[k % 5] << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            svg << (first ? "" : " ") << fixed(sx(s.x[i]), 3) << ',' << fixed(sy(s.y[i]), 3);
            first = false;
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << left + pw - 4 << "\" y=\"" << top + 14 + 14 * static_cast<double>(k)
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colors[k % 5] << "\">"
            << xml_escape(s.name) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace sqf
