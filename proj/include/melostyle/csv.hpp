#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "melostyle/errors.hpp"

namespace melostyle::csv {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(trim(line.substr(start)));
            break;
        }
        out.emplace_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

/// `%.10g` by default; every table writer goes through here.
inline std::string fmt(double v, int precision = 10) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

/// A parsed comma-separated table: header plus rows with their 1-based file
/// line numbers. Blank lines are skipped.
struct Table {
    std::vector<std::string> header;
    struct Row {
        std::size_t line;
        std::vector<std::string> cells;
    };
    std::vector<Row> rows;

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

inline Table parse(std::istream& in, const std::string& source) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError(source + ": expected " + std::to_string(t.header.size()) +
                                 " columns, found " + std::to_string(cells.size()),
                             lineno);
        t.rows.push_back({lineno, std::move(cells)});
    }
    if (!have_header) throw FormatError(source + ": missing header line");
    return t;
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return parse(in, path);
}

inline void require_header(const Table& t, const std::vector<std::string>& expected,
                           const std::string& source) {
    if (t.header != expected) {
        std::string want;
        for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
        throw FormatError(source + ": header must be '" + want + "'");
    }
}

inline std::string join(const std::vector<std::string>& cells, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(sep);
        out += cells[i];
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace melostyle::csv
