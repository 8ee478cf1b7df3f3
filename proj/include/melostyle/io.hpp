#pragma once

// Loaders and writers for the plain-text corpus formats:
//
//   pitch file      time_s,f0_hz       one row per 10 ms frame, f0 <= 0 is unvoiced
//   energy file     time_s,energy      same grid
//   manifest        clip_id,style,tonic_hz,pitch_path,energy_path,audio_path
//   responses       clip_id,listener_id,category,label
//   feature table   clip_id,<feature names...>,style

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "melostyle/csv.hpp"
#include "melostyle/errors.hpp"
#include "melostyle/types.hpp"

namespace melostyle {

namespace detail {

/// Maps a timestamp onto the 10 ms grid, tolerating +-1 ms of print jitter.
inline std::size_t grid_index(double t, std::size_t line, const std::string& source) {
    if (!std::isfinite(t) || t < -0.001)
        throw FormatError(source + ": line " + std::to_string(line) + ": invalid time");
    const double idx = std::round(t / kHopSeconds);
    if (std::abs(t - idx * kHopSeconds) > 0.001 + 1e-9)
        throw FormatError(source + ": line " + std::to_string(line) + ": time " + csv::fmt(t) +
                          " is not on the 10 ms grid");
    return static_cast<std::size_t>(std::max(0.0, idx));
}

/// Reads a `time_s,<value>` series into a frame-indexed vector; gaps stay nullopt.
inline std::vector<std::optional<double>> read_series(std::istream& in, const std::string& source,
                                                      const std::string& value_column) {
    auto table = csv::parse(in, source);
    csv::require_header(table, {"time_s", value_column}, source);
    std::vector<std::optional<double>> out;
    std::optional<std::size_t> prev;
    for (const auto& row : table.rows) {
        auto t = csv::to_double(row.cells[0]);
        auto v = csv::to_double(row.cells[1]);
        if (!t) throw ParseError(source + ": malformed time '" + row.cells[0] + "'", row.line);
        if (!v) throw ParseError(source + ": malformed value '" + row.cells[1] + "'", row.line);
        if (!std::isfinite(*v)) throw ParseError(source + ": non-finite value", row.line);
        auto idx = grid_index(*t, row.line, source);
        if (prev && idx <= *prev)
            throw FormatError(source + ": line " + std::to_string(row.line) +
                              ": times must be strictly increasing");
        prev = idx;
        if (out.size() <= idx) out.resize(idx + 1);
        out[idx] = *v;
    }
    return out;
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path path(p);
    if (path.is_absolute()) return path.string();
    return (base / path).lexically_normal().string();
}

}  // namespace detail

inline PitchTrack parse_pitch_track(std::istream& in, const std::string& source = "<pitch>") {
    auto series = detail::read_series(in, source, "f0_hz");
    PitchTrack track;
    track.f0.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!series[i] || *series[i] <= 0.0) continue;
        const double f = *series[i];
        if (f < kMinVoicedHz || f > kMaxVoicedHz)
            throw ValidationError(source + ": frame " + std::to_string(i) + ": voiced f0 " +
                                  csv::fmt(f) + " Hz outside [50, 2000]");
        track.f0[i] = f;
    }
    return track;
}

inline PitchTrack load_pitch_track(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open pitch file " + path);
    return parse_pitch_track(in, path);
}

inline std::string format_pitch_track(const PitchTrack& track) {
    std::string out = "time_s,f0_hz\n";
    for (std::size_t i = 0; i < track.size(); ++i) {
        out += csv::fixed(static_cast<double>(i) * kHopSeconds, 2);
        out += ',';
        out += csv::fixed(track.f0[i].value_or(0.0), 6);
        out += '\n';
    }
    return out;
}

inline void write_pitch_track(const std::string& path, const PitchTrack& track) {
    csv::write_text(path, format_pitch_track(track));
}

inline CentsTrack to_cents(const PitchTrack& track, double tonic_hz) {
    if (!(tonic_hz > 0.0) || !std::isfinite(tonic_hz))
        throw ArgumentError("tonic must be positive, got " + csv::fmt(tonic_hz));
    CentsTrack out;
    out.tonic_hz = tonic_hz;
    out.cents.resize(track.size());
    for (std::size_t i = 0; i < track.size(); ++i)
        if (track.f0[i]) out.cents[i] = 1200.0 * std::log2(*track.f0[i] / tonic_hz);
    return out;
}

inline PitchTrack from_cents(const CentsTrack& cents) {
    PitchTrack out;
    out.f0.resize(cents.size());
    for (std::size_t i = 0; i < cents.size(); ++i)
        if (cents.cents[i]) out.f0[i] = cents.tonic_hz * std::exp2(*cents.cents[i] / 1200.0);
    return out;
}

inline EnergyContour parse_energy(std::istream& in, const std::string& source = "<energy>") {
    auto series = detail::read_series(in, source, "energy");
    EnergyContour out;
    out.energy.resize(series.size(), 0.0);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!series[i]) continue;
        if (*series[i] < 0.0)
            throw ValidationError(source + ": frame " + std::to_string(i) + ": negative energy");
        out.energy[i] = *series[i];
    }
    return out;
}

inline EnergyContour load_energy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open energy file " + path);
    return parse_energy(in, path);
}

/// Pads/zeroes an energy contour so it matches `pitch` frame for frame.
inline EnergyContour align_energy(EnergyContour energy, const PitchTrack& pitch) {
    if (energy.size() > pitch.size()) {
        const bool tail_silent = std::all_of(energy.energy.begin() + static_cast<std::ptrdiff_t>(pitch.size()),
                                             energy.energy.end(), [](double e) { return e == 0.0; });
        if (!tail_silent)
            throw AlignmentError("energy contour has " + std::to_string(energy.size()) +
                                 " frames, pitch track only " + std::to_string(pitch.size()));
    }
    energy.energy.resize(pitch.size(), 0.0);
    for (std::size_t i = 0; i < pitch.size(); ++i)
        if (!pitch.f0[i]) energy.energy[i] = 0.0;
    return energy;
}

inline std::string format_energy(const EnergyContour& energy) {
    std::string out = "time_s,energy\n";
    for (std::size_t i = 0; i < energy.size(); ++i) {
        out += csv::fixed(static_cast<double>(i) * kHopSeconds, 2);
        out += ',';
        out += csv::fmt(energy.energy[i], 9);
        out += '\n';
    }
    return out;
}

inline void write_energy(const std::string& path, const EnergyContour& energy) {
    csv::write_text(path, format_energy(energy));
}

inline const std::vector<std::string>& manifest_header() {
    static const std::vector<std::string> h = {"clip_id",    "style",       "tonic_hz",
                                               "pitch_path", "energy_path", "audio_path"};
    return h;
}

/// Relative resource paths resolve against the manifest's directory. Every
/// offending row is reported in one ValidationError.
inline std::vector<ClipRecord> load_dataset(const std::string& manifest) {
    auto table = csv::read_file(manifest);
    csv::require_header(table, manifest_header(), manifest);
    const auto base = std::filesystem::path(manifest).parent_path();

    std::vector<ClipRecord> clips;
    std::vector<std::string> problems;
    std::set<std::string> seen;
    for (const auto& row : table.rows) {
        const auto& c = row.cells;
        const std::string where = "line " + std::to_string(row.line) + " (" + c[0] + ")";
        ClipRecord rec;
        rec.clip_id = c[0];
        if (rec.clip_id.empty()) problems.push_back(where + ": empty clip_id");
        if (!seen.insert(rec.clip_id).second) problems.push_back(where + ": duplicate clip_id " + c[0]);
        if (auto s = parse_style(c[1]))
            rec.style = *s;
        else
            problems.push_back(where + ": unknown style '" + c[1] + "'");
        auto tonic = csv::to_double(c[2]);
        if (!tonic || *tonic < kMinTonicHz || *tonic > kMaxTonicHz)
            problems.push_back(where + ": tonic_hz '" + c[2] + "' outside [50, 500]");
        else
            rec.tonic_hz = *tonic;
        rec.pitch_path = detail::resolve(base, c[3]);
        rec.energy_path = detail::resolve(base, c[4]);
        rec.audio_path = detail::resolve(base, c[5]);
        if (rec.pitch_path.empty() || !std::filesystem::exists(rec.pitch_path))
            problems.push_back(where + ": missing pitch file " + c[3]);
        if (!rec.energy_path.empty() && !std::filesystem::exists(rec.energy_path))
            problems.push_back(where + ": missing energy file " + c[4]);
        if (!rec.audio_path.empty() && !std::filesystem::exists(rec.audio_path))
            problems.push_back(where + ": missing audio file " + c[5]);
        clips.push_back(std::move(rec));
    }
    if (!problems.empty()) {
        std::string msg = manifest + ": invalid manifest";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ValidationError(msg);
    }
    return clips;
}

/// Paths are written as given; callers decide whether they are relative.
inline std::string format_manifest(const std::vector<ClipRecord>& clips) {
    std::string out = csv::join(manifest_header()) + "\n";
    for (const auto& c : clips) {
        out += csv::join({c.clip_id, std::string(style_name(c.style)), csv::fmt(c.tonic_hz),
                          c.pitch_path, c.energy_path, c.audio_path});
        out += '\n';
    }
    return out;
}

inline std::vector<ListenerResponse> load_responses(const std::string& path) {
    auto table = csv::read_file(path);
    csv::require_header(table, {"clip_id", "listener_id", "category", "label"}, path);
    std::vector<ListenerResponse> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& row : table.rows) {
        ListenerResponse r;
        r.clip_id = row.cells[0];
        r.listener_id = row.cells[1];
        auto cat = parse_category(row.cells[2]);
        if (!cat) throw ParseError(path + ": unknown listener category '" + row.cells[2] + "'", row.line);
        auto lab = parse_listener_label(row.cells[3]);
        if (!lab) throw ParseError(path + ": unknown label '" + row.cells[3] + "'", row.line);
        r.category = *cat;
        r.label = *lab;
        if (!seen.emplace(r.clip_id, r.listener_id).second)
            throw ValidationError(path + ": line " + std::to_string(row.line) + ": listener " +
                                  r.listener_id + " labelled clip " + r.clip_id + " twice");
        out.push_back(std::move(r));
    }
    return out;
}

/// Feature table: one FeatureVector per clip plus its style label. Column
/// order is kept as read; missing cells are left out of `values`.
struct FeatureTable {
    std::vector<std::string> names;
    std::vector<FeatureVector> rows;
    std::vector<Style> styles;
};

inline std::string format_feature_table(const FeatureTable& t) {
    std::vector<std::string> header = {"clip_id"};
    header.insert(header.end(), t.names.begin(), t.names.end());
    header.push_back("style");
    std::string out = csv::join(header) + "\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::vector<std::string> cells = {t.rows[r].clip_id};
        for (const auto& n : t.names) {
            auto v = t.rows[r].get(n);
            cells.push_back(v ? csv::fmt(*v, 12) : std::string());
        }
        cells.emplace_back(style_name(t.styles[r]));
        out += csv::join(cells) + "\n";
    }
    return out;
}

inline void write_feature_table(const std::string& path, const FeatureTable& t) {
    csv::write_text(path, format_feature_table(t));
}

inline FeatureTable load_feature_table(const std::string& path) {
    auto table = csv::read_file(path);
    if (table.header.size() < 2 || table.header.front() != "clip_id" || table.header.back() != "style")
        throw FormatError(path + ": header must be 'clip_id,<features...>,style'");
    FeatureTable t;
    t.names.assign(table.header.begin() + 1, table.header.end() - 1);
    for (const auto& row : table.rows) {
        FeatureVector fv;
        fv.clip_id = row.cells.front();
        for (std::size_t j = 0; j < t.names.size(); ++j) {
            const auto& cell = row.cells[j + 1];
            if (cell.empty()) continue;
            auto v = csv::to_double(cell);
            if (!v || !std::isfinite(*v))
                throw ParseError(path + ": bad value '" + cell + "' for " + t.names[j], row.line);
            fv.values[t.names[j]] = *v;
        }
        auto s = parse_style(row.cells.back());
        if (!s) throw ParseError(path + ": unknown style '" + row.cells.back() + "'", row.line);
        t.rows.push_back(std::move(fv));
        t.styles.push_back(*s);
    }
    return t;
}

}  // namespace melostyle
