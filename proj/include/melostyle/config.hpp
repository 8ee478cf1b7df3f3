#pragma once

// Run configuration: line-oriented key=value text, overridable per key.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "melostyle/csv.hpp"
#include "melostyle/errors.hpp"
#include "melostyle/features.hpp"
#include "melostyle/stats.hpp"

namespace melostyle {

struct RunConfig {
    double N_ms = 400.0;
    double J_cents = 20.0;
    double x = 0.3;
    double bin_width = 8.0;
    std::size_t median_win_bins = 7;
    double floor_frac = 0.05;
    double dev = 20.0;
    std::size_t k = 7;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    double ridge = 1e-6;
    std::size_t bins = 10;

    static const std::vector<std::string>& keys() {
        static const std::vector<std::string> k = {"N_ms", "J_cents", "x",  "bin_width", "median_win_bins", "floor_frac",
                                                   "dev",  "k",       "folds", "seed",   "ridge",           "bins"};
        return k;
    }

    void set(const std::string& key, const std::string& value) {
        const auto real = [&] {
            const auto v = csv::to_double(value);
            if (!v || !std::isfinite(*v)) throw ConfigError("config key " + key + ": not a number: '" + value + "'");
            return *v;
        };
        const auto count = [&]() -> std::uint64_t {
            std::uint64_t v = 0;
            const auto t = csv::trim(value);
            const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || p != t.data() + t.size() || t.empty())
                throw ConfigError("config key " + key + ": not a non-negative integer: '" + value + "'");
            return v;
        };
        if (key == "N_ms") N_ms = real();
        else if (key == "J_cents") J_cents = real();
        else if (key == "x") x = real();
        else if (key == "bin_width") bin_width = real();
        else if (key == "median_win_bins") median_win_bins = count();
        else if (key == "floor_frac") floor_frac = real();
        else if (key == "dev") dev = real();
        else if (key == "k") k = count();
        else if (key == "folds") folds = count();
        else if (key == "seed") seed = count();
        else if (key == "ridge") ridge = real();
        else if (key == "bins") bins = count();
        else throw ConfigError("unknown config key '" + key + "'");
    }

    void validate() const {
        if (N_ms < 50.0) throw ConfigError("N_ms must be >= 50");
        if (!(J_cents > 0.0)) throw ConfigError("J_cents must be > 0");
        if (!(x > 0.0 && x < 1.0)) throw ConfigError("x must lie in (0, 1)");
        if (!(bin_width > 0.0)) throw ConfigError("bin_width must be > 0");
        if (median_win_bins < 1) throw ConfigError("median_win_bins must be >= 1");
        if (!(floor_frac >= 0.0 && floor_frac < 1.0)) throw ConfigError("floor_frac must lie in [0, 1)");
        if (!(dev > 0.0 && dev < 50.0)) throw ConfigError("dev must lie in (0, 50)");
        if (k < 1) throw ConfigError("k must be >= 1");
        if (folds < 2) throw ConfigError("folds must be >= 2");
        if (!(ridge >= 0.0)) throw ConfigError("ridge must be >= 0");
        if (bins < 2) throw ConfigError("bins must be >= 2");
    }

    ExtractionConfig extraction() const {
        ExtractionConfig e;
        e.segmentation = {N_ms, J_cents};
        e.gamak_threshold = x;
        e.bin_width = bin_width;
        e.peaks.median_win_bins = median_win_bins;
        e.peaks.floor_frac = floor_frac;
        e.ed_dev = dev;
        return e;
    }
};

/// Blank lines and lines starting with '#' are ignored.
inline RunConfig parse_config(std::istream& in, const std::string& source = "<config>", RunConfig base = {}) {
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        const auto t = csv::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(no) + ": expected key=value");
        base.set(std::string(csv::trim(t.substr(0, eq))), std::string(csv::trim(t.substr(eq + 1))));
    }
    return base;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in, path);
}

}  // namespace melostyle
