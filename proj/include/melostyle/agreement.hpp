#pragma once

// Listener/classifier agreement: two-best confidences on both sides and the
// Pearson correlation t-test between the two label sequences.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "melostyle/errors.hpp"
#include "melostyle/types.hpp"

namespace melostyle {

enum class LabelSource { Listeners, Classifier };

struct LabeledConfidence {
    std::string clip_id;
    Style label = Style::Hindustani;
    double confidence = 0.0;
    LabelSource source = LabelSource::Listeners;
    bool tie_broken = false;  // listener majority was tied between styles
};

/// Majority label over the seven answer options with confidence
/// p1 / (100 + p2), p1 and p2 being the top two percentages. Style ties are
/// broken alphabetically by code (C < H < T); a majority that is not a style
/// is reported as an anomaly.
inline LabeledConfidence aggregate_listeners(const std::vector<ListenerResponse>& responses, const std::string& clip) {
    std::array<double, kNumListenerLabels> counts{};
    double total = 0.0;
    for (const auto& r : responses) {
        if (r.clip_id != clip) continue;
        counts[static_cast<std::size_t>(r.label)] += 1.0;
        total += 1.0;
    }
    if (total == 0.0) throw MissingDataError("no listener responses for clip " + clip);

    std::array<double, kNumListenerLabels> pct{};
    for (std::size_t i = 0; i < kNumListenerLabels; ++i) pct[i] = 100.0 * counts[i] / total;
    const double top = *std::max_element(counts.begin(), counts.end());

    std::vector<Style> tied;
    for (std::size_t i = 0; i < kNumListenerLabels; ++i)
        if (counts[i] == top)
            if (auto s = label_style(static_cast<ListenerLabel>(i))) tied.push_back(*s);
    if (tied.empty()) throw AnomalyError("listener majority for clip " + clip + " is not one of H, C, T");
    std::sort(tied.begin(), tied.end(), [](Style a, Style b) { return style_code(a) < style_code(b); });

    const Style label = tied.front();
    const auto chosen = static_cast<std::size_t>(index_of(label));  // H, C, T share indices with ListenerLabel
    double second = 0.0;
    for (std::size_t i = 0; i < kNumListenerLabels; ++i)
        if (i != chosen) second = std::max(second, pct[i]);

    LabeledConfidence out;
    out.clip_id = clip;
    out.label = label;
    out.confidence = pct[chosen] / (100.0 + second);
    out.source = LabelSource::Listeners;
    out.tie_broken = tied.size() > 1;
    return out;
}

/// P1 / (1 + P2) over the two largest posteriors.
inline double classifier_confidence(const std::array<double, kNumStyles>& posteriors) {
    double sum = 0.0;
    for (double p : posteriors) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw ArgumentError("posterior outside [0, 1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("posteriors do not sum to 1");
    auto sorted = posteriors;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return sorted[0] / (1.0 + sorted[1]);
}

/// H -> 1, C -> 0, T -> -1.
inline double label_code(Style s) {
    switch (s) {
        case Style::Hindustani: return 1.0;
        case Style::Carnatic: return 0.0;
        case Style::Turkish: return -1.0;
    }
    return 0.0;
}

inline constexpr double kCriticalT = 1.96;  // two-sided 5%

/// t statistic of a Pearson correlation; +-inf when |r| = 1.
inline double correlation_t(double r, std::size_t n) {
    if (n < 3) throw ArgumentError("t statistic needs n >= 3");
    const double denom = 1.0 - r * r;
    if (denom <= 0.0) return r > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    return r * std::sqrt(static_cast<double>(n) - 2.0) / std::sqrt(denom);
}

struct CorrelationResult {
    double r = 0.0;
    double t = 0.0;
    std::size_t n = 0;

    bool perfect() const { return std::isinf(t); }
    bool significant() const { return std::abs(t) > kCriticalT; }
    std::string verdict() const {
        if (perfect()) return r > 0 ? "perfect agreement" : "perfect disagreement";
        return significant() ? "significant" : "not significant";
    }
};

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("correlation undefined: a label sequence is constant");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Pairs the two lists by clip id (order of `a`); both must cover the same clips.
inline CorrelationResult label_correlation(const std::vector<LabeledConfidence>& a, const std::vector<LabeledConfidence>& b) {
    std::map<std::string, Style> bl;
    for (const auto& x : b) bl[x.clip_id] = x.label;
    std::set<std::string> al;
    for (const auto& x : a) al.insert(x.clip_id);
    std::vector<std::string> missing;
    for (const auto& x : a)
        if (!bl.contains(x.clip_id)) missing.push_back(x.clip_id);
    for (const auto& [id, _] : bl)
        if (!al.contains(id)) missing.push_back(id);
    if (!missing.empty()) {
        std::string msg = "clip sets differ; unmatched ids:";
        for (const auto& m : missing) msg += " " + m;
        throw ValidationError(msg);
    }
    std::vector<double> x, y;
    for (const auto& item : a) {
        x.push_back(label_code(item.label));
        y.push_back(label_code(bl.at(item.clip_id)));
    }
    CorrelationResult res;
    res.n = x.size();
    if (res.n < 3) throw ArgumentError("correlation needs at least 3 clips");
    res.r = pearson(x, y);
    res.t = correlation_t(res.r, res.n);
    return res;
}

}  // namespace melostyle
