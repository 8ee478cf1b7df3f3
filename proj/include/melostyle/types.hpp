#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "melostyle/errors.hpp"

namespace melostyle {

/// Frame hop of every pitch/energy series, in seconds.
inline constexpr double kHopSeconds = 0.010;
inline constexpr double kFrameRate = 100.0;

inline constexpr double kMinVoicedHz = 50.0;
inline constexpr double kMaxVoicedHz = 2000.0;
inline constexpr double kMinTonicHz = 50.0;
inline constexpr double kMaxTonicHz = 500.0;

/// Registry order doubles as the deterministic tie-break order.
enum class Style { Hindustani = 0, Carnatic = 1, Turkish = 2 };
inline constexpr std::size_t kNumStyles = 3;
inline constexpr std::array<Style, kNumStyles> kStyles = {Style::Hindustani, Style::Carnatic,
                                                          Style::Turkish};

inline constexpr std::size_t index_of(Style s) noexcept { return static_cast<std::size_t>(s); }

inline std::string_view style_code(Style s) {
    switch (s) {
        case Style::Hindustani: return "H";
        case Style::Carnatic: return "C";
        case Style::Turkish: return "T";
    }
    return "?";
}

inline std::string_view style_name(Style s) {
    switch (s) {
        case Style::Hindustani: return "Hindustani";
        case Style::Carnatic: return "Carnatic";
        case Style::Turkish: return "Turkish";
    }
    return "?";
}

/// Accepts the full name (any case) or the one-letter code.
inline std::optional<Style> parse_style(std::string_view token) {
    std::string lower;
    for (char c : token) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "h" || lower == "hindustani") return Style::Hindustani;
    if (lower == "c" || lower == "carnatic") return Style::Carnatic;
    if (lower == "t" || lower == "turkish") return Style::Turkish;
    return std::nullopt;
}

/// f0 per 10 ms frame; std::nullopt marks an unvoiced frame.
struct PitchTrack {
    std::vector<std::optional<double>> f0;

    std::size_t size() const noexcept { return f0.size(); }
    double duration() const noexcept { return static_cast<double>(f0.size()) * kHopSeconds; }
    std::size_t voiced_count() const noexcept {
        std::size_t n = 0;
        for (const auto& v : f0) n += v.has_value();
        return n;
    }
};

struct CentsTrack {
    std::vector<std::optional<double>> cents;
    double tonic_hz = 0.0;

    std::size_t size() const noexcept { return cents.size(); }
    double duration() const noexcept { return static_cast<double>(cents.size()) * kHopSeconds; }
    std::size_t voiced_count() const noexcept {
        std::size_t n = 0;
        for (const auto& v : cents) n += v.has_value();
        return n;
    }
    /// Voiced samples in frame order with the unvoiced gaps removed.
    std::vector<double> voiced() const {
        std::vector<double> out;
        out.reserve(cents.size());
        for (const auto& v : cents)
            if (v) out.push_back(*v);
        return out;
    }
};

/// Harmonic energy per frame, aligned to a PitchTrack. Zero at unvoiced frames,
/// so `energy > 0` is the voicing mask when no pitch track is at hand.
struct EnergyContour {
    std::vector<double> energy;

    std::size_t size() const noexcept { return energy.size(); }
};

struct ClipRecord {
    std::string clip_id;
    Style style = Style::Hindustani;
    double tonic_hz = 0.0;
    std::string pitch_path;
    std::string energy_path;  // empty when absent
    std::string audio_path;   // empty when absent
};

// Feature registry, in canonical column order.
inline const std::vector<std::string>& feature_registry() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"stable_note", "gamak", "tonic_distance", "transitions",
                                      "tremolo_zcr", "MIPD",  "MPD",            "WPD",
                                      "ED"};
        for (int i = 1; i <= 13; ++i) v.push_back("mfcc_" + std::to_string(i));
        return v;
    }();
    return names;
}

inline const std::vector<std::string>& melodic_feature_names() {
    static const std::vector<std::string> names(feature_registry().begin(),
                                                feature_registry().begin() + 9);
    return names;
}

inline const std::vector<std::string>& timbre_feature_names() {
    static const std::vector<std::string> names(feature_registry().begin() + 9,
                                                feature_registry().end());
    return names;
}

/// Position in the registry; names outside it sort after every registry name.
inline std::size_t registry_index(std::string_view name) {
    const auto& reg = feature_registry();
    for (std::size_t i = 0; i < reg.size(); ++i)
        if (reg[i] == name) return i;
    return reg.size();
}

struct FeatureVector {
    std::string clip_id;
    std::map<std::string, double> values;

    std::optional<double> get(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end()) return std::nullopt;
        return it->second;
    }
};

enum class ListenerCategory { TrainedUnder3y, Trained3to10y, TrainedOver10y, AvidListener, Amateur };
inline constexpr std::size_t kNumListenerCategories = 5;

inline std::string_view category_token(ListenerCategory c) {
    switch (c) {
        case ListenerCategory::TrainedUnder3y: return "Trained<3y";
        case ListenerCategory::Trained3to10y: return "Trained3-10y";
        case ListenerCategory::TrainedOver10y: return "Trained>10y";
        case ListenerCategory::AvidListener: return "AvidListener";
        case ListenerCategory::Amateur: return "Amateur";
    }
    return "?";
}

inline std::optional<ListenerCategory> parse_category(std::string_view token) {
    for (int i = 0; i < static_cast<int>(kNumListenerCategories); ++i) {
        auto c = static_cast<ListenerCategory>(i);
        if (token == category_token(c)) return c;
    }
    return std::nullopt;
}

/// The seven answer options of the listening test.
enum class ListenerLabel { H = 0, C, T, NH, NC, NT, NS };
inline constexpr std::size_t kNumListenerLabels = 7;

inline std::string_view label_token(ListenerLabel l) {
    static constexpr std::array<std::string_view, kNumListenerLabels> tokens = {
        "H", "C", "T", "NH", "NC", "NT", "NS"};
    return tokens[static_cast<std::size_t>(l)];
}

inline std::optional<ListenerLabel> parse_listener_label(std::string_view token) {
    for (std::size_t i = 0; i < kNumListenerLabels; ++i)
        if (token == label_token(static_cast<ListenerLabel>(i))) return static_cast<ListenerLabel>(i);
    return std::nullopt;
}

/// H, C, T map onto a style; the Not-X and Not-Sure options do not.
inline std::optional<Style> label_style(ListenerLabel l) {
    switch (l) {
        case ListenerLabel::H: return Style::Hindustani;
        case ListenerLabel::C: return Style::Carnatic;
        case ListenerLabel::T: return Style::Turkish;
        default: return std::nullopt;
    }
}

struct ListenerResponse {
    std::string clip_id;
    std::string listener_id;
    ListenerCategory category = ListenerCategory::Amateur;
    ListenerLabel label = ListenerLabel::NS;
};

}  // namespace melostyle
