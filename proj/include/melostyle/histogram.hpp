#pragma once

// Pitch histograms, noisy-histogram peak picking and the microtonality
// measures built on the deviation of peaks from the 100-cent grid.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "melostyle/errors.hpp"
#include "melostyle/types.hpp"

namespace melostyle {

inline constexpr double kOctaveCents = 1200.0;

struct PitchHistogram {
    double bin_width = 8.0;
    std::vector<double> counts;
    double origin = 0.0;  // lower edge of bin 0, in cents
    bool folded = false;

    std::size_t size() const noexcept { return counts.size(); }
    double center(std::size_t i) const noexcept {
        return origin + (static_cast<double>(i) + 0.5) * bin_width;
    }
    double total() const { return std::accumulate(counts.begin(), counts.end(), 0.0); }
};

struct Peak {
    double location;  // cents
    double height;
};

struct PeakSet {
    std::vector<Peak> peaks;  // strictly increasing locations

    std::size_t size() const noexcept { return peaks.size(); }
    bool empty() const noexcept { return peaks.empty(); }
};

/// Folded histograms wrap voiced cents into [0, 1200); unfolded ones span
/// [min, max] rounded out to bin edges anchored at 0 cents.
inline PitchHistogram build_histogram(const CentsTrack& cents, bool folded, double bin_width = 8.0) {
    if (!(bin_width > 0.0)) throw ArgumentError("bin width must be positive");
    const auto voiced = cents.voiced();
    if (voiced.empty()) throw UndefinedFeatureError("histogram of a track without voiced frames");

    PitchHistogram h;
    h.bin_width = bin_width;
    h.folded = folded;
    if (folded) {
        const double nb = kOctaveCents / bin_width;
        if (std::abs(nb - std::round(nb)) > 1e-9)
            throw ArgumentError("bin width must divide 1200 cents for a folded histogram");
        const auto n = static_cast<std::size_t>(std::lround(nb));
        h.counts.assign(n, 0.0);
        for (double c : voiced) {
            double w = std::fmod(c, kOctaveCents);
            if (w < 0.0) w += kOctaveCents;
            auto idx = static_cast<std::size_t>(std::floor(w / bin_width));
            h.counts[std::min(idx, n - 1)] += 1.0;
        }
    } else {
        const auto [lo, hi] = std::minmax_element(voiced.begin(), voiced.end());
        const double first = std::floor(*lo / bin_width);
        const double last = std::floor(*hi / bin_width);
        h.origin = first * bin_width;
        h.counts.assign(static_cast<std::size_t>(last - first) + 1, 0.0);
        for (double c : voiced) h.counts[static_cast<std::size_t>(std::floor(c / bin_width) - first)] += 1.0;
    }
    return h;
}

/// Centred median of histogram counts; circular for folded histograms, shrinking
/// symmetrically at the ends otherwise.
inline std::vector<double> median_filter_counts(const PitchHistogram& hist, std::size_t window) {
    const std::size_t n = hist.size();
    const std::size_t half = window / 2;
    std::vector<double> out(n), buf;
    for (std::size_t i = 0; i < n; ++i) {
        buf.clear();
        if (hist.folded) {
            for (std::size_t d = 0; d < 2 * half + 1; ++d) buf.push_back(hist.counts[(i + n * (half + 1) + d - half) % n]);
        } else {
            const std::size_t h = std::min({half, i, n - 1 - i});
            buf.assign(hist.counts.begin() + static_cast<std::ptrdiff_t>(i - h),
                       hist.counts.begin() + static_cast<std::ptrdiff_t>(i + h + 1));
        }
        const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
        std::nth_element(buf.begin(), mid, buf.end());
        out[i] = *mid;
    }
    return out;
}

struct PeakPickParams {
    std::size_t median_win_bins = 7;
    double floor_frac = 0.05;
    double vicinity_cents = 30.0;
};

namespace detail {

/// Bins at the centre of every plateau of `y` whose neighbours on both sides
/// are strictly lower. A curve with no lower neighbour anywhere has no maxima.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& y, bool circular) {
    const std::size_t n = y.size();
    std::vector<std::size_t> out;
    if (n == 0 || std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) return out;

    const auto sn = static_cast<std::ptrdiff_t>(n);
    auto at = [&](std::ptrdiff_t i) -> std::optional<double> {
        if (circular) return y[static_cast<std::size_t>((i % sn + sn) % sn)];
        if (i < 0 || i >= sn) return std::nullopt;
        return y[static_cast<std::size_t>(i)];
    };
    // Begin right after a change of value so a plateau is never split by the wrap.
    std::size_t start = 0;
    if (circular)
        while (y[start] == y[(start + n - 1) % n]) ++start;

    std::size_t pos = 0;
    while (pos < n) {
        const double v = y[(start + pos) % n];
        std::size_t len = 1;
        while (pos + len < n && y[(start + pos + len) % n] == v) ++len;
        const auto first = static_cast<std::ptrdiff_t>(start + pos);
        const auto left = at(first - 1);
        const auto right = at(first + static_cast<std::ptrdiff_t>(len));
        if ((!left || *left < v) && (!right || *right < v)) out.push_back((start + pos + (len - 1) / 2) % n);
        pos += len;
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline double bin_distance_cents(const PitchHistogram& h, std::size_t a, std::size_t b) {
    double d = std::abs(static_cast<double>(a) - static_cast<double>(b));
    if (h.folded) d = std::min(d, static_cast<double>(h.size()) - d);
    return d * h.bin_width;
}

}  // namespace detail

/// Peaks are found on the median-filtered histogram, then refined to the
/// tallest original bin within +-30 cents.
inline PeakSet pick_peaks(const PitchHistogram& hist, const PeakPickParams& params = {}) {
    PeakSet out;
    const std::size_t n = hist.size();
    if (n == 0) return out;
    if (params.median_win_bins < 1) throw ArgumentError("median window must be >= 1 bin");
    const auto filtered = median_filter_counts(hist, params.median_win_bins);
    const double top = *std::max_element(filtered.begin(), filtered.end());
    if (!(top > 0.0)) return out;

    std::vector<std::size_t> cand;
    for (auto i : detail::local_maxima(filtered, hist.folded))
        if (filtered[i] > params.floor_frac * top) cand.push_back(i);

    // Merge maxima closer than the vicinity, keeping the higher (lower index on ties).
    std::vector<std::size_t> order = cand;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return filtered[a] > filtered[b]; });
    std::vector<std::size_t> kept;
    for (auto c : order) {
        bool close = false;
        for (auto k : kept)
            if (detail::bin_distance_cents(hist, c, k) < params.vicinity_cents) close = true;
        if (!close) kept.push_back(c);
    }

    const auto radius = static_cast<std::ptrdiff_t>(std::lround(params.vicinity_cents / hist.bin_width));
    std::vector<Peak> peaks;
    for (auto c : kept) {
        std::ptrdiff_t best = -1;
        double best_count = -1.0;
        double best_off = 0.0;
        for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
            std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(c) + d;
            if (hist.folded)
                idx = (idx % static_cast<std::ptrdiff_t>(n) + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n);
            else if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(n))
                continue;
            const double v = hist.counts[static_cast<std::size_t>(idx)];
            // Tallest bin; ties go to the one closest to the filtered maximum.
            if (v > best_count || (v == best_count && std::abs(static_cast<double>(d)) < best_off)) {
                best = idx;
                best_count = v;
                best_off = std::abs(static_cast<double>(d));
            }
        }
        if (best >= 0 && best_count > 0.0)
            peaks.push_back({hist.center(static_cast<std::size_t>(best)), best_count});
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.location < b.location; });
    for (const auto& p : peaks)
        if (out.peaks.empty() || out.peaks.back().location != p.location) out.peaks.push_back(p);
    return out;
}

inline PeakSet pick_peaks(const PitchHistogram& hist, std::size_t median_win_bins, double floor_frac) {
    PeakPickParams p;
    p.median_win_bins = median_win_bins;
    p.floor_frac = floor_frac;
    return pick_peaks(hist, p);
}

/// Centre of the tallest bin of an unfolded tonic-referenced histogram (first on ties).
inline double tonic_distance(const PitchHistogram& hist_unfolded) {
    if (hist_unfolded.size() == 0 || !(hist_unfolded.total() > 0.0))
        throw UndefinedFeatureError("tonic distance of an empty histogram");
    const auto it = std::max_element(hist_unfolded.counts.begin(), hist_unfolded.counts.end());
    return hist_unfolded.center(static_cast<std::size_t>(it - hist_unfolded.counts.begin()));
}

/// Distance in cents from `l` to the nearest multiple of 100, in [0, 50].
inline double fold_deviation(double l) {
    double d = std::fmod(l, 100.0);
    if (d < 0.0) d += 100.0;
    return d < 50.0 ? d : 100.0 - d;
}

/// Maximum inter-peak deviation: needs no tonic. 0 with fewer than two peaks.
inline double mipd(const PeakSet& peaks) {
    double best = 0.0;
    for (std::size_t i = 0; i < peaks.size(); ++i)
        for (std::size_t j = i + 1; j < peaks.size(); ++j)
            best = std::max(best, fold_deviation(std::abs(peaks.peaks[i].location - peaks.peaks[j].location)));
    return best;
}

/// Maximum deviation of any peak from the tonic-anchored grid; 0 for no peaks.
inline double mpd(const PeakSet& peaks) {
    double best = 0.0;
    for (const auto& p : peaks.peaks) best = std::max(best, fold_deviation(p.location));
    return best;
}

/// Height-weighted mean grid deviation, heights normalised by the tallest peak.
inline double wpd(const PeakSet& peaks) {
    if (peaks.empty()) throw UndefinedFeatureError("weighted peak deviation of an empty peak set");
    double tallest = 0.0;
    for (const auto& p : peaks.peaks) tallest = std::max(tallest, p.height);
    if (!(tallest > 0.0)) throw UndefinedFeatureError("weighted peak deviation with zero-height peaks");
    double sum = 0.0;
    for (const auto& p : peaks.peaks) sum += fold_deviation(p.location) * (p.height / tallest);
    return sum / static_cast<double>(peaks.size());
}

/// Share of histogram mass in bins whose centre lies within `dev` cents of the grid.
inline double ed(const PitchHistogram& hist_folded, double dev = 20.0) {
    if (!(dev > 0.0 && dev < 50.0)) throw ArgumentError("ED vicinity must lie in (0, 50) cents");
    const double total = hist_folded.total();
    if (!(total > 0.0)) throw UndefinedFeatureError("equitempered density of an empty histogram");
    double near = 0.0;
    for (std::size_t i = 0; i < hist_folded.size(); ++i)
        if (fold_deviation(hist_folded.center(i)) <= dev) near += hist_folded.counts[i];
    return near / total;
}

}  // namespace melostyle
