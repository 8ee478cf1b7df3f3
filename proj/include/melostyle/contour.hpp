#pragma once

// Time-domain features of the melodic contour: steady/gamak segmentation, the
// pitch-modulation energy ratio and gamak measure, Haar-approximation melodic
// transitions, and the energy tremolo feature.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "melostyle/errors.hpp"
#include "melostyle/types.hpp"

namespace melostyle {

enum class FrameLabel { Steady, Gamak, Unvoiced };

struct SegmentationParams {
    double n_ms = 400.0;     // minimum steady duration
    double j_cents = 20.0;   // max pitch standard deviation inside a steady window
};

/// Musician-labelled alternative to the data-driven default.
inline constexpr SegmentationParams kMusicologicalSegmentation{700.0, 10.0};

struct Segmentation {
    std::vector<FrameLabel> labels;
    SegmentationParams params;

    std::size_t count(FrameLabel l) const {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
    }
};

namespace detail {

/// Half-open [begin, end) ranges of consecutive frames satisfying `pred`.
template <typename Pred>
std::vector<std::pair<std::size_t, std::size_t>> runs(std::size_t n, Pred pred) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0;
    while (i < n) {
        if (!pred(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && pred(j)) ++j;
        out.emplace_back(i, j);
        i = j;
    }
    return out;
}

inline double population_std(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

}  // namespace detail

/// A voiced frame is Steady when some window of N ms inside its voiced run
/// covers it and has pitch standard deviation <= J cents.
inline Segmentation segment_contour(const CentsTrack& cents, SegmentationParams params = {}) {
    if (params.n_ms < 50.0) throw ArgumentError("N_ms must be >= 50");
    if (!(params.j_cents > 0.0)) throw ArgumentError("J_cents must be > 0");

    const std::size_t n = cents.size();
    const auto win = static_cast<std::size_t>(std::lround(params.n_ms / 1000.0 * kFrameRate));
    Segmentation seg;
    seg.params = params;
    seg.labels.assign(n, FrameLabel::Unvoiced);

    std::vector<double> buf;
    for (auto [b, e] : detail::runs(n, [&](std::size_t i) { return cents.cents[i].has_value(); })) {
        buf.clear();
        for (std::size_t i = b; i < e; ++i) buf.push_back(*cents.cents[i]);
        std::vector<bool> steady(e - b, false);
        if (e - b >= win) {
            for (std::size_t s = 0; s + win <= buf.size(); ++s) {
                if (detail::population_std(std::span(buf).subspan(s, win)) <= params.j_cents)
                    std::fill(steady.begin() + static_cast<std::ptrdiff_t>(s),
                              steady.begin() + static_cast<std::ptrdiff_t>(s + win), true);
            }
        }
        for (std::size_t i = b; i < e; ++i)
            seg.labels[i] = steady[i - b] ? FrameLabel::Steady : FrameLabel::Gamak;
    }
    return seg;
}

inline double stable_note_measure(const Segmentation& seg) {
    const auto steady = seg.count(FrameLabel::Steady);
    const auto voiced = steady + seg.count(FrameLabel::Gamak);
    if (voiced == 0) throw UndefinedFeatureError("stable note measure needs at least one voiced frame");
    return static_cast<double>(steady) / static_cast<double>(voiced);
}

struct ErParams {
    std::size_t window_frames = 100;  // 1 s
    std::size_t hop_frames = 50;      // 0.5 s
    std::size_t nfft = 512;
    double num_lo_hz = 3.0, num_hi_hz = 7.5;
    double den_lo_hz = 1.0, den_hi_hz = 20.0;
};

struct ErSeries {
    std::vector<double> values;
};

/// Ratio of modulation energy in [3, 7.5] Hz to energy in [1, 20] Hz for one
/// mean-subtracted window, via a zero-padded rectangular-window DFT evaluated
/// only at the bins inside the wider band. A window with no energy in the
/// denominator band scores 0.
inline double energy_ratio(std::span<const double> window, const ErParams& p = {}) {
    double mean = 0.0;
    for (double v : window) mean += v;
    mean /= static_cast<double>(window.size());

    std::vector<double> cos_t(p.nfft), sin_t(p.nfft);
    for (std::size_t m = 0; m < p.nfft; ++m) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(p.nfft);
        cos_t[m] = std::cos(w);
        sin_t[m] = std::sin(w);
    }
    const double bin_hz = kFrameRate / static_cast<double>(p.nfft);
    const auto k_lo = static_cast<std::size_t>(std::ceil(p.den_lo_hz / bin_hz - 1e-9));
    const auto k_hi = static_cast<std::size_t>(std::floor(p.den_hi_hz / bin_hz + 1e-9));
    double num = 0.0, den = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < window.size(); ++t) {
            const double z = window[t] - mean;
            const std::size_t m = (k * t) % p.nfft;
            re += z * cos_t[m];
            im -= z * sin_t[m];
        }
        const double e = re * re + im * im;
        const double f = static_cast<double>(k) * bin_hz;
        den += e;
        if (f >= p.num_lo_hz - 1e-9 && f <= p.num_hi_hz + 1e-9) num += e;
    }
    if (!(den > 0.0)) return 0.0;
    return std::clamp(num / den, 0.0, 1.0);
}

/// ER for every 1 s window (0.5 s hop) lying entirely inside one Gamak run.
inline ErSeries energy_ratio_series(const CentsTrack& cents, const Segmentation& seg, const ErParams& p = {}) {
    if (seg.labels.size() != cents.size())
        throw AlignmentError("segmentation and cents track differ in length");
    ErSeries out;
    std::vector<double> buf;
    for (auto [b, e] : detail::runs(cents.size(), [&](std::size_t i) { return seg.labels[i] == FrameLabel::Gamak; })) {
        for (std::size_t s = b; s + p.window_frames <= e; s += p.hop_frames) {
            buf.clear();
            for (std::size_t i = s; i < s + p.window_frames; ++i) buf.push_back(*cents.cents[i]);
            out.values.push_back(energy_ratio(buf, p));
        }
    }
    return out;
}

/// Fraction of ER values strictly above `threshold`; 0 for an empty series.
inline double gamak_measure(const ErSeries& er, double threshold = 0.3) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ArgumentError("gamak threshold must lie in (0, 1)");
    if (er.values.empty()) return 0.0;
    const auto above = std::count_if(er.values.begin(), er.values.end(), [&](double v) { return v > threshold; });
    return static_cast<double>(above) / static_cast<double>(er.values.size());
}

/// Level-L Haar approximation reconstructed to the input length: every block
/// of 2^L samples becomes its mean; a trailing partial block its own mean.
inline std::vector<double> haar_approximation(std::span<const double> x, unsigned level = 5) {
    if (x.empty()) throw ArgumentError("Haar approximation of an empty sequence");
    if (level < 1) throw ArgumentError("Haar level must be >= 1");
    const std::size_t block = std::size_t{1} << level;
    std::vector<double> out(x.size());
    for (std::size_t b = 0; b < x.size(); b += block) {
        const std::size_t e = std::min(b + block, x.size());
        double sum = 0.0;
        for (std::size_t i = b; i < e; ++i) sum += x[i];
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(b), out.begin() + static_cast<std::ptrdiff_t>(e),
                  sum / static_cast<double>(e - b));
    }
    return out;
}

inline constexpr double kSemitoneCents = 100.0;

/// Upward jumps of more than a semitone in the level-5 Haar approximation of
/// the concatenated voiced contour, per second of clip.
inline double melodic_transitions(const CentsTrack& cents, unsigned level = 5) {
    const auto voiced = cents.voiced();
    if (voiced.empty()) throw UndefinedFeatureError("melodic transitions need at least one voiced frame");
    const auto approx = haar_approximation(voiced, level);

    std::vector<double> steps;
    for (double v : approx)
        if (steps.empty() || steps.back() != v) steps.push_back(v);
    std::size_t up = 0;
    for (std::size_t i = 1; i < steps.size(); ++i)
        if (steps[i] - steps[i - 1] > kSemitoneCents) ++up;
    return static_cast<double>(up) / cents.duration();
}

/// Centred running median with a window that shrinks symmetrically at the edges,
/// so every output is one of the inputs.
inline std::vector<double> median_filter(std::span<const double> x, std::size_t window) {
    const std::size_t half = window / 2;
    std::vector<double> out(x.size()), buf;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t h = std::min({half, i, x.size() - 1 - i});
        buf.assign(x.begin() + static_cast<std::ptrdiff_t>(i - h), x.begin() + static_cast<std::ptrdiff_t>(i + h + 1));
        std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(h), buf.end());
        out[i] = buf[h];
    }
    return out;
}

inline constexpr std::size_t kTremoloMedianFrames = 101;  // 1 s

/// Sign changes per voiced second of (energy - median-filtered energy) over the
/// concatenated voiced frames. Exact-zero residuals are skipped.
inline double tremolo_feature(const EnergyContour& energy) {
    std::vector<double> voiced;
    for (double e : energy.energy)
        if (e > 0.0) voiced.push_back(e);
    if (voiced.size() < static_cast<std::size_t>(kFrameRate))
        throw UndefinedFeatureError("tremolo feature needs at least 1 s of voiced frames");

    const auto smooth = median_filter(voiced, kTremoloMedianFrames);
    std::size_t crossings = 0;
    int prev_sign = 0;
    for (std::size_t i = 0; i < voiced.size(); ++i) {
        const double r = voiced[i] - smooth[i];
        const int sign = (r > 0.0) - (r < 0.0);
        if (sign == 0) continue;
        if (prev_sign != 0 && sign != prev_sign) ++crossings;
        prev_sign = sign;
    }
    return static_cast<double>(crossings) / (static_cast<double>(voiced.size()) * kHopSeconds);
}

}  // namespace melostyle
