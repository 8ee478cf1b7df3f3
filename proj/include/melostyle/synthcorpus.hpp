#pragma once

// Seeded generator of style-archetype clips (pitch, energy and optionally
// audio) standing in for a real vocal corpus.
//
//   Hindustani  long steady notes near the tonic, slow glides, on-grid notes
//   Carnatic    dense 5-7 Hz oscillations of 100-200 cents around +700 cents
//   Turkish     3-4 Hz ornaments above +1200 cents, off-grid scale degrees,
//               5-7 Hz energy tremolo

#include <algorithm>
#include <array>
#include <complex>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "melostyle/audio.hpp"
#include "melostyle/errors.hpp"
#include "melostyle/io.hpp"
#include "melostyle/types.hpp"

namespace melostyle {

struct ScaleDegree {
    double degree;  // nominal grid position, cents above the tonic
    double offset;  // rendered deviation from the grid, cents
};

struct StyleArchetype {
    Style style = Style::Hindustani;
    std::vector<ScaleDegree> scale;
    double steady_fraction = 0.8;
    double oscillation_rate_hz = 0.0;
    double oscillation_extent_cents = 0.0;  // peak to peak
    double register_center = 0.0;
    double register_low = -500.0, register_high = 800.0;
    std::optional<double> tremolo_rate_hz;
    double tonic_hz = 150.0;
    std::uint64_t seed = 0;
};

struct SynthClip {
    Style style = Style::Hindustani;
    double tonic_hz = 150.0;
    CentsTrack cents;
    PitchTrack pitch;
    EnergyContour energy;
};

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(std::mt19937_64& rng, double sd) { return std::normal_distribution<double>(0.0, sd)(rng); }

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline void validate_archetype(const StyleArchetype& a) {
    if (a.oscillation_rate_hz < 0.0 || a.oscillation_rate_hz > 15.0)
        throw ArgumentError("oscillation rate outside 0-15 Hz");
    if (a.tremolo_rate_hz && (*a.tremolo_rate_hz < 0.0 || *a.tremolo_rate_hz > 15.0))
        throw ArgumentError("tremolo rate outside 0-15 Hz");
    if (std::abs(a.register_center) > 2400.0 || std::abs(a.register_low) > 2400.0 || std::abs(a.register_high) > 2400.0)
        throw ArgumentError("register outside +-2400 cents");
    if (a.scale.empty()) throw ArgumentError("archetype has an empty scale");
    if (a.tonic_hz < kMinTonicHz || a.tonic_hz > kMaxTonicHz) throw ArgumentError("tonic outside [50, 500] Hz");
}

}  // namespace detail

/// Default archetype for a style; every random choice flows from `seed`.
inline StyleArchetype make_archetype(Style style, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    StyleArchetype a;
    a.style = style;
    a.seed = seed;
    a.tonic_hz = std::round(detail::uniform(rng, 120.0, 230.0) * 100.0) / 100.0;
    switch (style) {
        case Style::Hindustani: {
            const std::vector<std::vector<double>> ragas = {{0, 200, 400, 600, 700, 900, 1100},
                                                            {0, 100, 300, 600, 700, 800, 1100},
                                                            {0, 300, 500, 800, 1000},
                                                            {0, 200, 400, 500, 700, 900, 1000}};
            for (double d : ragas[detail::pick(rng, ragas.size())])
                a.scale.push_back({d, d == 0.0 ? 0.0 : detail::uniform(rng, -6.0, 6.0)});
            a.steady_fraction = 0.85;
            a.register_center = 0.0;
            a.register_low = -500.0;
            a.register_high = 800.0;
            break;
        }
        case Style::Carnatic: {
            const std::vector<std::vector<double>> ragas = {{0, 100, 300, 600, 700, 800, 1100},
                                                            {0, 300, 500, 800, 1000},
                                                            {0, 200, 400, 600, 700, 900, 1100}};
            for (double d : ragas[detail::pick(rng, ragas.size())])
                a.scale.push_back({d, d == 0.0 || d == 700.0 ? 0.0 : detail::uniform(rng, -15.0, 15.0)});
            a.steady_fraction = 0.15;
            a.oscillation_rate_hz = detail::uniform(rng, 5.0, 7.0);
            a.oscillation_extent_cents = detail::uniform(rng, 100.0, 200.0);
            a.register_center = 700.0;
            a.register_low = 200.0;
            a.register_high = 1400.0;
            break;
        }
        case Style::Turkish: {
            std::vector<double> base = {0, 200, 300, 500, 700, 900, 1000};
            std::vector<std::size_t> movable = {1, 2, 5, 6};  // never the tonic, fourth or fifth
            for (std::size_t i = movable.size() - 1; i > 0; --i) std::swap(movable[i], movable[detail::pick(rng, i + 1)]);
            const std::size_t n_off = 2 + detail::pick(rng, 2);
            for (std::size_t i = 0; i < base.size(); ++i) {
                double off = detail::uniform(rng, -5.0, 5.0);
                if (std::find(movable.begin(), movable.begin() + static_cast<std::ptrdiff_t>(n_off), i) !=
                    movable.begin() + static_cast<std::ptrdiff_t>(n_off))
                {
                    // Move away from the closer neighbouring degree.
                    const double below = base[i] - base[i - 1];
                    const double above = (i + 1 < base.size() ? base[i + 1] : 1200.0) - base[i];
                    off = (below > above ? -1.0 : 1.0) * detail::uniform(rng, 35.0, 45.0);
                }
                if (base[i] == 0.0) off = 0.0;
                a.scale.push_back({base[i], off});
            }
            a.steady_fraction = 0.5;
            a.oscillation_rate_hz = detail::uniform(rng, 3.0, 4.0);
            a.oscillation_extent_cents = detail::uniform(rng, 30.0, 60.0);
            a.register_center = 1700.0;
            a.register_low = 1200.0;
            a.register_high = 2400.0;
            a.tremolo_rate_hz = detail::uniform(rng, 5.0, 7.0);
            break;
        }
    }
    return a;
}

/// Pitch and energy for one clip of `duration_s` seconds (>= 10).
inline SynthClip generate_clip(const StyleArchetype& a, double duration_s) {
    if (!(duration_s >= 10.0)) throw ArgumentError("synthetic clips must be at least 10 s long");
    detail::validate_archetype(a);
    std::mt19937_64 rng(a.seed);
    const auto n_frames = static_cast<std::size_t>(std::lround(duration_s * kFrameRate));
    const double dt = kHopSeconds;

    // Available note positions: scale degrees across octaves, within the register.
    struct Note {
        double cents;
        double weight;
    };
    std::vector<Note> notes;
    for (int oct = -2; oct <= 2; ++oct)
        for (const auto& d : a.scale) {
            const double c = d.degree + d.offset + 1200.0 * oct;
            if (c < a.register_low || c > a.register_high) continue;
            double w = 1.0;
            if (a.style == Style::Hindustani && d.degree == 0.0) w = 3.0;
            if (std::abs(d.offset) >= 30.0) w = 5.0;
            notes.push_back({c, w});
        }
    std::sort(notes.begin(), notes.end(), [](const Note& x, const Note& y) { return x.cents < y.cents; });
    if (notes.empty()) throw ArgumentError("no scale degree falls inside the register");
    std::size_t home = 0;
    for (std::size_t i = 1; i < notes.size(); ++i)
        if (std::abs(notes[i].cents - a.register_center) < std::abs(notes[home].cents - a.register_center)) home = i;
    const std::size_t max_step = a.style == Style::Carnatic ? 3 : 2;
    const std::size_t reach = a.style == Style::Turkish ? 5 : 4;
    auto next_note = [&](std::size_t from) {
        std::vector<double> w(notes.size(), 0.0);
        for (std::size_t j = 0; j < notes.size(); ++j) {
            const std::size_t dist = j > from ? j - from : from - j;
            if (dist == 0 || dist > max_step) continue;
            w[j] = notes[j].weight / static_cast<double>(dist);
            const std::size_t from_home = j > home ? j - home : home - j;
            if (from_home > reach) w[j] *= 0.2;
        }
        if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) return from;
        return std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
    };

    auto start_note = [&] {
        std::vector<double> w;
        for (const auto& nt : notes) w.push_back(nt.weight);
        return std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
    };

    std::vector<std::optional<double>> cents(n_frames);
    std::vector<double> amp(n_frames, 0.0);
    const double level = detail::uniform(rng, 0.6, 1.6);
    const double drift_rate = detail::uniform(rng, 0.15, 0.35), drift_phase = detail::uniform(rng, 0.0, 6.28);
    const double drift_depth = a.style == Style::Hindustani ? 0.05 : 0.2;

    std::size_t t = static_cast<std::size_t>(detail::uniform(rng, 0.1, 0.3) / dt);
    std::size_t idx = home;
    while (t < n_frames) {
        const std::size_t phrase_start = t;
        const std::size_t n_notes = 3 + detail::pick(rng, 4);
        double prev = notes[idx].cents;
        double note_level = 1.0;
        for (std::size_t k = 0; k < n_notes && t < n_frames; ++k) {
            // Melodic walk over nearby degrees, weighted toward characteristic notes.
            if (k > 0) {
                idx = next_note(idx);
                note_level = detail::uniform(rng, 0.8, 1.2);
            }
            const double jitter_sd = a.style == Style::Hindustani ? 1.5 : a.style == Style::Carnatic ? 3.0 : 4.0;
            const double target = notes[idx].cents + std::clamp(detail::gaussian(rng, jitter_sd), -2.0 * jitter_sd, 2.0 * jitter_sd);

            // Glide from the previous note.
            if (k > 0) {
                double g;
                switch (a.style) {
                    case Style::Hindustani: g = detail::uniform(rng, 0.15, 0.3); break;
                    case Style::Carnatic: g = detail::uniform(rng, 0.06, 0.12); break;
                    default: g = detail::uniform(rng, 0.1, 0.2); break;
                }
                const auto gf = static_cast<std::size_t>(g / dt);
                for (std::size_t i = 0; i < gf && t < n_frames; ++i, ++t) {
                    const double u = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(gf + 1));
                    cents[t] = prev + (target - prev) * u + detail::gaussian(rng, 1.0);
                    amp[t] = note_level;
                }
            }

            // Note body.
            double dur;
            bool ornament;
            switch (a.style) {
                case Style::Hindustani:
                    dur = detail::uniform(rng, 0.8, 2.5);
                    ornament = false;
                    break;
                case Style::Carnatic:
                    ornament = detail::uniform(rng, 0.0, 1.0) > a.steady_fraction;
                    dur = ornament ? detail::uniform(rng, 0.6, 1.5) : detail::uniform(rng, 0.25, 0.5);
                    break;
                default:
                    ornament = detail::uniform(rng, 0.0, 1.0) > a.steady_fraction;
                    dur = detail::uniform(rng, 0.6, 1.8);
                    break;
            }
            const double rate = a.oscillation_rate_hz * detail::uniform(rng, 0.95, 1.05);
            const double extent = a.oscillation_extent_cents * detail::uniform(rng, 0.85, 1.15);
            const double phase = detail::uniform(rng, 0.0, 6.28);
            // Turkish ornaments occupy the head of the note, which then settles.
            const double ornament_span = a.style == Style::Turkish ? detail::uniform(rng, 0.3, 0.5) * dur : dur;
            // Intonation drift: first-order autoregressive noise with a ~0.3 s time constant.
            const double drift_sd = a.style == Style::Turkish ? detail::uniform(rng, 6.0, 10.0) : 2.5;
            constexpr double rho = 0.97;
            double drift = detail::gaussian(rng, drift_sd);
            const auto nf = static_cast<std::size_t>(dur / dt);
            for (std::size_t i = 0; i < nf && t < n_frames; ++i, ++t) {
                const double s = static_cast<double>(i) * dt;
                drift = rho * drift + std::sqrt(1.0 - rho * rho) * detail::gaussian(rng, drift_sd);
                double c = target + drift + detail::gaussian(rng, 1.5);
                if (ornament && s < ornament_span) c += 0.5 * extent * std::sin(2.0 * std::numbers::pi * rate * s + phase);
                cents[t] = c;
                amp[t] = note_level;
            }
            prev = target;
        }

        // Phrase envelope: attack/release ramps, slow drift, optional tremolo.
        const std::size_t phrase_end = t;
        const std::size_t attack = 8, release = 12;
        for (std::size_t i = phrase_start; i < phrase_end; ++i) {
            if (!cents[i]) continue;
            const double s = static_cast<double>(i) * dt;
            double env = 1.0;
            if (i - phrase_start < attack) env = 0.3 + 0.7 * static_cast<double>(i - phrase_start + 1) / attack;
            if (phrase_end - 1 - i < release) env = std::min(env, 0.35 + 0.65 * static_cast<double>(phrase_end - 1 - i) / release);
            env *= 1.0 + drift_depth * std::sin(2.0 * std::numbers::pi * drift_rate * s + drift_phase);
            if (a.tremolo_rate_hz) env *= 1.0 + 0.25 * std::sin(2.0 * std::numbers::pi * *a.tremolo_rate_hz * s);
            amp[i] *= level * env;
        }

        // Breath between phrases.
        t += static_cast<std::size_t>(detail::uniform(rng, 0.3, 0.8) / dt);
        if (a.style == Style::Turkish) idx = start_note();
        else if (a.style == Style::Carnatic || detail::uniform(rng, 0.0, 1.0) < 0.5) idx = home;
    }

    SynthClip clip;
    clip.style = a.style;
    clip.tonic_hz = a.tonic_hz;
    clip.cents.tonic_hz = a.tonic_hz;
    clip.cents.cents = std::move(cents);
    // Round-trip through Hz at the precision the pitch file stores.
    clip.pitch = from_cents(clip.cents);
    for (auto& f : clip.pitch.f0)
        if (f) f = std::round(*f * 1e6) / 1e6;
    clip.cents = to_cents(clip.pitch, a.tonic_hz);
    clip.energy.energy.assign(n_frames, 0.0);
    for (std::size_t i = 0; i < n_frames; ++i)
        if (clip.pitch.f0[i]) clip.energy.energy[i] = std::round(amp[i] * amp[i] * 1e6) / 1e6;
    return clip;
}

/// Voice-plus-accompaniment audio for a synthetic clip. Vowel formants and
/// noise are drawn per clip from pools shared by all styles; the drone is the
/// only accompaniment cue, and its level overlaps across styles.
inline AudioClip render_audio(const SynthClip& clip, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
    const double f1 = detail::uniform(rng, 350.0, 900.0), f2 = detail::uniform(rng, 900.0, 2400.0);
    const double bw1 = detail::uniform(rng, 120.0, 300.0), bw2 = detail::uniform(rng, 150.0, 400.0);
    const double tilt = detail::uniform(rng, -12.0, -5.0);  // dB per octave
    double drone_level = detail::uniform(rng, 0.0, 0.25);
    if (clip.style == Style::Turkish) drone_level *= 0.4;
    const double noise_level = detail::uniform(rng, 0.002, 0.02);
    constexpr std::size_t kHarmonics = 12;

    const std::size_t n_frames = clip.pitch.size();
    const std::size_t n = n_frames * kSamplesPerHop;
    AudioClip out;
    out.samples.assign(n, 0.0);

    auto harmonic_gain = [&](double f, std::size_t h) {
        const double formant = std::exp(-0.5 * std::pow((f - f1) / bw1, 2)) + 0.7 * std::exp(-0.5 * std::pow((f - f2) / bw2, 2));
        const double slope = std::pow(10.0, tilt * std::log2(static_cast<double>(h)) / 20.0);
        return slope * (0.2 + formant);
    };

    // Harmonic h has phase h * phase of the fundamental, so one complex
    // exponential per sample feeds every partial.
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double phase = 0.0;
    std::array<double, kHarmonics> gain{};
    for (std::size_t fr = 0; fr < n_frames; ++fr) {
        if (!clip.pitch.f0[fr]) continue;
        const double f0 = *clip.pitch.f0[fr];
        for (std::size_t h = 0; h < kHarmonics; ++h) {
            const double fh = f0 * static_cast<double>(h + 1);
            gain[h] = fh < 7500.0 ? harmonic_gain(fh, h + 1) : 0.0;
        }
        const double a0 = std::sqrt(clip.energy.energy[fr]);
        const bool next_voiced = fr + 1 < n_frames && clip.pitch.f0[fr + 1];
        const double f1 = next_voiced ? *clip.pitch.f0[fr + 1] : f0;
        const double a1 = next_voiced ? std::sqrt(clip.energy.energy[fr + 1]) : a0;
        for (std::size_t j = 0; j < kSamplesPerHop; ++j) {
            const double frac = static_cast<double>(j) / kSamplesPerHop;
            const double f = f0 + frac * (f1 - f0);
            const std::complex<double> z(std::cos(phase), std::sin(phase));
            std::complex<double> zh = z;
            double y = 0.0;
            for (std::size_t h = 0; h < kHarmonics; ++h) {
                y += gain[h] * zh.imag();
                zh *= z;
            }
            out.samples[fr * kSamplesPerHop + j] = (a0 + frac * (a1 - a0)) * y;
            phase = std::fmod(phase + two_pi * f / kSampleRate, two_pi);
        }
    }
    double peak = 0.0;
    for (double v : out.samples) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (auto& v : out.samples) v *= 0.6 / peak;

    // Drone on tonic and fifth, plus broadband noise.
    std::normal_distribution<double> noise(0.0, noise_level);
    const double tonic = clip.tonic_hz;
    for (std::size_t s = 0; s < n; ++s) {
        const double tt = static_cast<double>(s) / kSampleRate;
        const std::complex<double> zt = std::polar(1.0, two_pi * tonic * tt);
        const std::complex<double> zf = std::polar(1.0, two_pi * tonic * 1.5 * tt);
        std::complex<double> pt = zt, pf = zf;
        double d = 0.0;
        for (int h = 1; h <= 6; ++h) {
            d += (pt.imag() + 0.6 * pf.imag()) / h;
            pt *= zt;
            pf *= zf;
        }
        out.samples[s] += drone_level * 0.25 * d + noise(rng);
        out.samples[s] = std::clamp(out.samples[s], -0.99, 0.99);
    }
    return out;
}

inline StyleArchetype make_archetype(const std::string& style, std::uint64_t seed) {
    const auto s = parse_style(style);
    if (!s) throw ArgumentError("unknown style '" + style + "'");
    return make_archetype(*s, seed);
}

inline std::uint64_t clip_seed(std::uint64_t seed, Style style, std::size_t index) {
    std::uint64_t z = seed * 0x100000001b3ULL + (index_of(style) + 1) * 0x9e3779b97f4a7c15ULL + index;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Writes `count` clips per style into `outdir` plus `manifest.csv`; paths in
/// the manifest are relative to `outdir`.
inline std::vector<ClipRecord> generate_corpus(const std::filesystem::path& outdir, const std::vector<Style>& styles,
                                               std::size_t count, double duration_s, std::uint64_t seed,
                                               bool with_audio) {
    std::filesystem::create_directories(outdir);
    std::vector<ClipRecord> clips;
    for (auto style : styles) {
        for (std::size_t i = 0; i < count; ++i) {
            const auto cs = clip_seed(seed, style, i);
            const auto clip = generate_clip(make_archetype(style, cs), duration_s);
            char id[32];
            std::snprintf(id, sizeof id, "%s%03zu", std::string(style_code(style)).c_str(), i + 1);
            ClipRecord r;
            r.clip_id = id;
            r.style = style;
            r.tonic_hz = clip.tonic_hz;
            r.pitch_path = r.clip_id + ".pitch.csv";
            r.energy_path = r.clip_id + ".energy.csv";
            write_pitch_track((outdir / r.pitch_path).string(), clip.pitch);
            write_energy((outdir / r.energy_path).string(), clip.energy);
            if (with_audio) {
                r.audio_path = r.clip_id + ".wav";
                write_wav((outdir / r.audio_path).string(), render_audio(clip, cs));
            }
            clips.push_back(r);
        }
    }
    csv::write_text((outdir / "manifest.csv").string(), format_manifest(clips));
    return clips;
}

}  // namespace melostyle
