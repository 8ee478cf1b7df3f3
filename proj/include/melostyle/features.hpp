#pragma once

// Per-clip feature extraction: pitch contour (+ energy, + audio) -> FeatureVector.

#include <atomic>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "melostyle/audio.hpp"
#include "melostyle/contour.hpp"
#include "melostyle/errors.hpp"
#include "melostyle/histogram.hpp"
#include "melostyle/io.hpp"
#include "melostyle/types.hpp"

namespace melostyle {

struct ExtractionConfig {
    SegmentationParams segmentation;
    double gamak_threshold = 0.3;
    double bin_width = 8.0;
    PeakPickParams peaks;
    double ed_dev = 20.0;
    HarmonicEnergyConfig harmonic;
    MfccConfig mfcc_config;
};

/// Melodic features from the cents track; tremolo_zcr only when an energy
/// contour is given; mfcc_* only when audio is given.
inline FeatureVector extract_features(const std::string& clip_id, const CentsTrack& cents,
                                      const EnergyContour* energy, const AudioClip* audio,
                                      const ExtractionConfig& cfg = {}) {
    if (cents.voiced_count() == 0) throw ValidationError("clip " + clip_id + " has no voiced frames");
    FeatureVector fv;
    fv.clip_id = clip_id;
    auto& v = fv.values;

    const auto seg = segment_contour(cents, cfg.segmentation);
    v["stable_note"] = stable_note_measure(seg);
    v["gamak"] = gamak_measure(energy_ratio_series(cents, seg), cfg.gamak_threshold);

    const auto unfolded = build_histogram(cents, false, cfg.bin_width);
    v["tonic_distance"] = tonic_distance(unfolded);
    v["transitions"] = melodic_transitions(cents);
    if (energy) v["tremolo_zcr"] = tremolo_feature(*energy);

    const auto folded = build_histogram(cents, true, cfg.bin_width);
    const auto peaks = pick_peaks(folded, cfg.peaks);
    v["MIPD"] = mipd(peaks);
    v["MPD"] = mpd(peaks);
    if (!peaks.empty()) v["WPD"] = wpd(peaks);
    v["ED"] = ed(folded, cfg.ed_dev);

    if (audio) {
        const auto m = mfcc(*audio, cfg.mfcc_config);
        for (std::size_t i = 0; i < m.coefficients.size(); ++i) v["mfcc_" + std::to_string(i + 1)] = m.coefficients[i];
    }
    return fv;
}

struct ExtractionResult {
    FeatureVector features;
    std::vector<std::string> warnings;
};

/// Loads a clip's files and extracts its features. Energy comes from the
/// energy file when present, otherwise from the audio.
inline ExtractionResult extract_clip(const ClipRecord& clip, const ExtractionConfig& cfg = {}) {
    ExtractionResult out;
    const auto pitch = load_pitch_track(clip.pitch_path);
    const auto cents = to_cents(pitch, clip.tonic_hz);
    std::optional<AudioClip> audio;
    if (!clip.audio_path.empty()) audio = decode_wav(clip.audio_path);
    else out.warnings.push_back("clip " + clip.clip_id + " has no audio; timbre features omitted");

    std::optional<EnergyContour> energy;
    if (!clip.energy_path.empty()) energy = align_energy(load_energy(clip.energy_path), pitch);
    else if (audio) energy = harmonic_energy(*audio, pitch, cfg.harmonic);
    else out.warnings.push_back("clip " + clip.clip_id + " has neither energy nor audio; tremolo_zcr omitted");

    out.features = extract_features(clip.clip_id, cents, energy ? &*energy : nullptr, audio ? &*audio : nullptr, cfg);
    return out;
}

struct DatasetExtraction {
    FeatureTable table;
    std::vector<std::string> warnings;
    std::vector<std::string> errors;  // "clip_id: message", manifest order
    int worst_exit_code = 0;
};

/// Extracts every clip with `workers` threads; rows and messages follow
/// manifest order whatever the completion order.
inline DatasetExtraction extract_dataset(const std::vector<ClipRecord>& clips, const ExtractionConfig& cfg = {},
                                         unsigned workers = 1) {
    std::vector<std::optional<ExtractionResult>> results(clips.size());
    std::vector<std::string> errors(clips.size());
    std::vector<int> codes(clips.size(), 0);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < clips.size();) {
            try {
                results[i] = extract_clip(clips[i], cfg);
            } catch (const Error& e) {
                errors[i] = e.what();
                codes[i] = e.exit_code();
            } catch (const std::exception& e) {
                errors[i] = e.what();
                codes[i] = 2;
            }
        }
    };
    workers = std::max(1u, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    DatasetExtraction out;
    out.table.names = feature_registry();
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (!results[i]) {
            out.errors.push_back(clips[i].clip_id + ": " + errors[i]);
            out.worst_exit_code = std::max(out.worst_exit_code, codes[i]);
            continue;
        }
        for (auto& w : results[i]->warnings) out.warnings.push_back(std::move(w));
        out.table.rows.push_back(std::move(results[i]->features));
        out.table.styles.push_back(clips[i].style);
    }
    return out;
}

}  // namespace melostyle
