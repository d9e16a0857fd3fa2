#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "albatch/error.hpp"

namespace albatch::csv {

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    for (auto& cell : out) {
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
        std::size_t lead = 0;
        while (lead < cell.size() && cell[lead] == ' ') ++lead;
        cell.erase(0, lead);
    }
    return out;
}

/// Parses a finite double; anything else is an InputError.
inline double parse_double(std::string_view cell, std::string_view context) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || cell.empty()) {
        throw InputError(std::string(context) + ": not a number: '" + std::string(cell) + "'");
    }
    if (!std::isfinite(v)) throw InputError(std::string(context) + ": non-finite value");
    return v;
}

inline long long parse_int(std::string_view cell, std::string_view context) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw InputError(std::string(context) + ": not an integer: '" + std::string(cell) + "'");
    }
    return v;
}

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::ptrdiff_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
        return -1;
    }
};

/// Reads a header + rows file. Blank lines are skipped; ragged rows are rejected.
inline Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    Table t;
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                             " cells, got " + std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (!have_header) throw InputError("'" + path + "' has no header row");
    return t;
}

}  // namespace albatch::csv
