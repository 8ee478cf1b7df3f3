#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "melostyle/errors.hpp"
#include "melostyle/types.hpp"

namespace melostyle {

inline constexpr int kSampleRate = 16000;
inline constexpr std::size_t kSamplesPerHop = 160;  // 10 ms at 16 kHz

/// Mono PCM audio, samples in [-1, 1].
struct AudioClip {
    int sample_rate = kSampleRate;
    std::vector<double> samples;

    double duration() const noexcept {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
    }
};

// ---------------------------------------------------------------------------
// WAV

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}
inline std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>(v >> 8));
}

}  // namespace detail

/// RIFF/WAVE, PCM 16-bit, mono, 16 kHz only. Nothing is resampled or downmixed.
inline AudioClip parse_wav(std::span<const unsigned char> bytes, const std::string& source = "<wav>") {
    auto bad = [&](const std::string& why) { return UnsupportedFormatError(source + ": " + why); };
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw bad("not a RIFF/WAVE file");

    bool have_fmt = false;
    std::span<const unsigned char> data;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::size_t len = detail::le32(chunk + 4);
        const std::size_t body = pos + 8;
        const std::size_t avail = std::min(len, bytes.size() - body);
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (avail < 16) throw bad("truncated fmt chunk");
            const unsigned char* f = bytes.data() + body;
            const auto format = detail::le16(f);
            const auto channels = detail::le16(f + 2);
            const auto rate = detail::le32(f + 4);
            const auto bits = detail::le16(f + 14);
            if (format != 1) throw bad("only PCM (format 1) is supported");
            if (channels != 1) throw bad("expected mono, found " + std::to_string(channels) + " channels");
            if (rate != kSampleRate) throw bad("expected 16000 Hz, found " + std::to_string(rate));
            if (bits != 16) throw bad("expected 16-bit samples, found " + std::to_string(bits));
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.subspan(body, avail);
        }
        pos = body + len + (len & 1);
    }
    if (!have_fmt) throw bad("missing fmt chunk");

    AudioClip clip;
    clip.samples.resize(data.size() / 2);
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(detail::le16(data.data() + 2 * i));
        clip.samples[i] = static_cast<double>(raw) / 32768.0;
    }
    return clip;
}

inline AudioClip decode_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open audio file " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_wav(bytes, path);
}

inline std::string encode_wav(const AudioClip& clip) {
    if (clip.sample_rate != kSampleRate) throw UnsupportedFormatError("only 16 kHz output is supported");
    const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    detail::put32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    detail::put32(out, 16);
    detail::put16(out, 1);
    detail::put16(out, 1);
    detail::put32(out, kSampleRate);
    detail::put32(out, kSampleRate * 2);
    detail::put16(out, 2);
    detail::put16(out, 16);
    out += "data";
    detail::put32(out, data_bytes);
    for (double s : clip.samples) {
        const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
        const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        detail::put16(out, static_cast<std::uint16_t>(v));
    }
    return out;
}

inline void write_wav(const std::string& path, const AudioClip& clip) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    const auto bytes = encode_wav(clip);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// ---------------------------------------------------------------------------
// Spectral helpers

namespace detail {

inline std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    return w;
}

/// |X(k)|^2 for k = 0..nfft/2 of a zero-padded real frame.
inline std::vector<double> power_spectrum(Eigen::FFT<double>& fft, const std::vector<double>& frame,
                                          std::size_t nfft) {
    std::vector<double> padded(nfft, 0.0);
    std::copy_n(frame.begin(), std::min(frame.size(), nfft), padded.begin());
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, padded);
    std::vector<double> out(nfft / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(spec[k]);
    return out;
}

}  // namespace detail

struct HarmonicEnergyConfig {
    std::size_t n_harmonics = 10;
    std::size_t frame_samples = 480;  // 30 ms
    std::size_t nfft = 512;
    double search_hz = 30.0;  // max bin within +-search_hz of each harmonic
    double max_harmonic_hz = 7800.0;
};

/// Per-harmonic energies |S(h*f0)|^2 for the frame centred on sample `center`.
/// Harmonics at or above `max_harmonic_hz` contribute nothing and are omitted.
inline std::vector<double> harmonic_terms(std::span<const double> samples, std::ptrdiff_t center,
                                          double f0, const HarmonicEnergyConfig& cfg = {}) {
    static thread_local Eigen::FFT<double> fft;
    const auto window = detail::hann(cfg.frame_samples);
    std::vector<double> frame(cfg.frame_samples, 0.0);
    const std::ptrdiff_t start = center - static_cast<std::ptrdiff_t>(cfg.frame_samples / 2);
    for (std::size_t i = 0; i < cfg.frame_samples; ++i) {
        const std::ptrdiff_t s = start + static_cast<std::ptrdiff_t>(i);
        if (s >= 0 && s < static_cast<std::ptrdiff_t>(samples.size()))
            frame[i] = samples[static_cast<std::size_t>(s)] * window[i];
    }
    const auto power = detail::power_spectrum(fft, frame, cfg.nfft);
    const double bin_hz = static_cast<double>(kSampleRate) / static_cast<double>(cfg.nfft);

    std::vector<double> terms;
    for (std::size_t h = 1; h <= cfg.n_harmonics; ++h) {
        const double fh = static_cast<double>(h) * f0;
        if (fh >= cfg.max_harmonic_hz) break;
        auto lo = static_cast<std::ptrdiff_t>(std::ceil((fh - cfg.search_hz) / bin_hz));
        auto hi = static_cast<std::ptrdiff_t>(std::floor((fh + cfg.search_hz) / bin_hz));
        lo = std::max<std::ptrdiff_t>(lo, 0);
        hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(power.size()) - 1);
        if (lo > hi) lo = hi = std::lround(fh / bin_hz);
        double best = 0.0;
        for (auto k = lo; k <= hi; ++k) best = std::max(best, power[static_cast<std::size_t>(k)]);
        terms.push_back(best);
    }
    return terms;
}

inline EnergyContour harmonic_energy(const AudioClip& audio, const PitchTrack& pitch,
                                     const HarmonicEnergyConfig& cfg = {}) {
    if (cfg.n_harmonics < 1) throw ArgumentError("n_harmonics must be >= 1");
    if (pitch.duration() > audio.duration() + 0.5 * kHopSeconds)
        throw AlignmentError("pitch track (" + std::to_string(pitch.duration()) +
                             " s) is longer than the audio (" + std::to_string(audio.duration()) + " s)");
    EnergyContour out;
    out.energy.assign(pitch.size(), 0.0);
    for (std::size_t i = 0; i < pitch.size(); ++i) {
        if (!pitch.f0[i]) continue;
        const auto terms = harmonic_terms(audio.samples, static_cast<std::ptrdiff_t>(i * kSamplesPerHop),
                                          *pitch.f0[i], cfg);
        for (double t : terms) out.energy[i] += t;
    }
    return out;
}

inline EnergyContour harmonic_energy(const AudioClip& audio, const PitchTrack& pitch, std::size_t n_harmonics) {
    HarmonicEnergyConfig cfg;
    cfg.n_harmonics = n_harmonics;
    return harmonic_energy(audio, pitch, cfg);
}

// ---------------------------------------------------------------------------
// MFCC
//
// Sphinx-style front end. The toolkit is named without its settings, so the
// numbers below are the fixed configuration of this library.

struct MfccConfig {
    double pre_emphasis = 0.97;
    std::size_t frame_samples = 410;  // 25.6 ms at 16 kHz
    std::size_t hop_samples = 160;    // 10 ms
    std::size_t nfft = 512;
    std::size_t n_filters = 40;
    double low_hz = 133.33334;
    double high_hz = 6855.4976;
    double log_floor = 1e-10;
    std::size_t n_coefficients = 13;
};

struct MfccSummary {
    std::array<double, 13> coefficients{};
};

namespace detail {

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

/// Triangular filters with unit peak, edges equally spaced on the mel axis.
inline std::vector<std::vector<double>> mel_filterbank(const MfccConfig& cfg) {
    const std::size_t nbins = cfg.nfft / 2 + 1;
    const double lo = hz_to_mel(cfg.low_hz), hi = hz_to_mel(cfg.high_hz);
    std::vector<double> edges(cfg.n_filters + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.n_filters + 1));
    std::vector<std::vector<double>> bank(cfg.n_filters, std::vector<double>(nbins, 0.0));
    for (std::size_t m = 0; m < cfg.n_filters; ++m) {
        const double left = edges[m], peak = edges[m + 1], right = edges[m + 2];
        for (std::size_t k = 0; k < nbins; ++k) {
            const double f = static_cast<double>(k) * kSampleRate / static_cast<double>(cfg.nfft);
            if (f > left && f < right)
                bank[m][k] = f <= peak ? (f - left) / (peak - left) : (right - f) / (right - peak);
        }
    }
    return bank;
}

}  // namespace detail

/// Clip-level mean of the per-frame cepstra c0..c12 (orthonormal DCT-II of
/// the natural-log mel energies).
inline MfccSummary mfcc(const AudioClip& audio, const MfccConfig& cfg = {}) {
    if (cfg.n_coefficients != 13) throw ArgumentError("MfccSummary holds exactly 13 coefficients");
    if (audio.samples.size() < cfg.frame_samples)
        throw ArgumentError("clip shorter than one MFCC frame (" + std::to_string(cfg.frame_samples) +
                            " samples)");

    std::vector<double> emph(audio.samples.size());
    emph[0] = audio.samples[0];
    for (std::size_t i = 1; i < emph.size(); ++i)
        emph[i] = audio.samples[i] - cfg.pre_emphasis * audio.samples[i - 1];

    const auto window = detail::hann(cfg.frame_samples);
    const auto bank = detail::mel_filterbank(cfg);
    const std::size_t M = cfg.n_filters;
    std::vector<std::vector<double>> dct(cfg.n_coefficients, std::vector<double>(M));
    for (std::size_t n = 0; n < cfg.n_coefficients; ++n) {
        const double scale = std::sqrt((n == 0 ? 1.0 : 2.0) / static_cast<double>(M));
        for (std::size_t m = 0; m < M; ++m)
            dct[n][m] = scale * std::cos(std::numbers::pi * static_cast<double>(n) *
                                         (static_cast<double>(m) + 0.5) / static_cast<double>(M));
    }

    Eigen::FFT<double> fft;
    const std::size_t n_frames = (emph.size() - cfg.frame_samples) / cfg.hop_samples + 1;
    std::vector<double> frame(cfg.frame_samples), logmel(M);
    MfccSummary out;
    for (std::size_t f = 0; f < n_frames; ++f) {
        const std::size_t start = f * cfg.hop_samples;
        for (std::size_t i = 0; i < cfg.frame_samples; ++i) frame[i] = emph[start + i] * window[i];
        const auto power = detail::power_spectrum(fft, frame, cfg.nfft);
        for (std::size_t m = 0; m < M; ++m) {
            double e = 0.0;
            for (std::size_t k = 0; k < power.size(); ++k) e += bank[m][k] * power[k];
            logmel[m] = std::log(std::max(e, cfg.log_floor));
        }
        for (std::size_t n = 0; n < cfg.n_coefficients; ++n) {
            double c = 0.0;
            for (std::size_t m = 0; m < M; ++m) c += dct[n][m] * logmel[m];
            out.coefficients[n] += c;
        }
    }
    for (auto& c : out.coefficients) c /= static_cast<double>(n_frames);
    return out;
}

// ---------------------------------------------------------------------------
// Stimulus resynthesis

inline constexpr double kStimulusPeak = 0.9;

/// Three equal-weight harmonics driven by a phase-continuous oscillator bank.
/// Frequency and amplitude (sqrt of energy) are linearly interpolated between
/// frames; voiced runs get 5 ms raised-cosine fades; the result is scaled to
/// a 0.9 peak.
inline AudioClip synthesize_stimulus(const CentsTrack& cents, const EnergyContour& energy) {
    if (cents.size() != energy.size())
        throw AlignmentError("cents track has " + std::to_string(cents.size()) + " frames, energy " +
                             std::to_string(energy.size()));
    if (!(cents.tonic_hz > 0.0)) throw ArgumentError("tonic must be positive");

    const std::size_t n_frames = cents.size();
    AudioClip out;
    out.samples.assign(n_frames * kSamplesPerHop, 0.0);

    std::vector<double> freq(n_frames, 0.0), amp(n_frames, 0.0);
    for (std::size_t i = 0; i < n_frames; ++i) {
        if (!cents.cents[i]) continue;
        freq[i] = cents.tonic_hz * std::exp2(*cents.cents[i] / 1200.0);
        amp[i] = std::sqrt(std::max(0.0, energy.energy[i]));
    }

    constexpr std::size_t fade = kSamplesPerHop / 2;  // 5 ms
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::array<double, 3> phase{};
    double peak = 0.0;
    std::size_t i = 0;
    while (i < n_frames) {
        if (!cents.cents[i]) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < n_frames && cents.cents[end]) ++end;
        const std::size_t s0 = i * kSamplesPerHop, s1 = end * kSamplesPerHop;
        for (std::size_t s = s0; s < s1; ++s) {
            const std::size_t fr = s / kSamplesPerHop;
            const double frac = static_cast<double>(s % kSamplesPerHop) / kSamplesPerHop;
            double f = freq[fr], a = amp[fr];
            if (fr + 1 < end) {
                f += frac * (freq[fr + 1] - f);
                a += frac * (amp[fr + 1] - a);
            }
            double gate = 1.0;
            if (s - s0 < fade) gate = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(s - s0) / fade);
            if (s1 - 1 - s < fade)
                gate = std::min(gate, 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(s1 - 1 - s) / fade));
            double y = 0.0;
            for (std::size_t h = 0; h < 3; ++h) {
                y += std::sin(phase[h]);
                phase[h] = std::fmod(phase[h] + two_pi * static_cast<double>(h + 1) * f / kSampleRate, two_pi);
            }
            out.samples[s] = gate * a * y / 3.0;
            peak = std::max(peak, std::abs(out.samples[s]));
        }
        i = end;
    }
    if (peak > 0.0)
        for (auto& s : out.samples) s = s / peak * kStimulusPeak;
    return out;
}

inline AudioClip synthesize_stimulus(CentsTrack cents, const EnergyContour& energy, double tonic_hz) {
    cents.tonic_hz = tonic_hz;
    return synthesize_stimulus(cents, energy);
}

}  // namespace melostyle
