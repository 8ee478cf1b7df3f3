#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace melostyle;
using testutil::cents_track;
using testutil::sine;

namespace {

std::size_t count(const Segmentation& s, FrameLabel l) {
    return static_cast<std::size_t>(std::count(s.labels.begin(), s.labels.end(), l));
}

double tremolo_oracle(const std::vector<double>& e) {
    std::size_t crossings = 0;
    int prev = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const std::size_t h = std::min<std::size_t>({50, i, e.size() - 1 - i});
        std::vector<double> w(e.begin() + static_cast<std::ptrdiff_t>(i - h), e.begin() + static_cast<std::ptrdiff_t>(i + h + 1));
        std::sort(w.begin(), w.end());
        const double r = e[i] - w[w.size() / 2];
        const int s = r > 0 ? 1 : (r < 0 ? -1 : 0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++crossings;
        prev = s;
    }
    return static_cast<double>(crossings) / (static_cast<double>(e.size()) / 100.0);
}

}  // namespace

TEST(Segmentation, ConstantPitchIsSteady) {
    const auto seg = segment_contour(cents_track(std::vector<double>(1000, 150.0)));
    EXPECT_EQ(count(seg, FrameLabel::Steady), 1000u);
    EXPECT_DOUBLE_EQ(stable_note_measure(seg), 1.0);
}

TEST(Segmentation, WideVibratoIsGamak) {
    const auto v = sine(1000, 60.0, 5.0);
    double m = 0.0, ss = 0.0;
    for (double x : v) m += x / 1000.0;
    for (double x : v) ss += (x - m) * (x - m) / 1000.0;
    EXPECT_NEAR(std::sqrt(ss), 60.0 / std::sqrt(2.0), 0.5);
    const auto seg = segment_contour(cents_track(v));
    EXPECT_EQ(count(seg, FrameLabel::Gamak), 1000u);
    EXPECT_DOUBLE_EQ(stable_note_measure(seg), 0.0);
}

TEST(Segmentation, ShortFlatNoteBetweenGlidesIsGamak) {
    std::vector<double> c;
    for (int i = 0; i < 50; ++i) c.push_back(i * 20.0);
    for (int i = 0; i < 30; ++i) c.push_back(1000.0);
    for (int i = 0; i < 50; ++i) c.push_back(1000.0 - i * 20.0);
    const auto seg = segment_contour(cents_track(c));
    for (int i = 50; i < 80; ++i) EXPECT_EQ(seg.labels[static_cast<std::size_t>(i)], FrameLabel::Gamak) << i;
}

TEST(Segmentation, UnvoicedFramesSplitRuns) {
    auto t = cents_track(std::vector<double>(100, 0.0));
    t.cents[30].reset();
    const auto seg = segment_contour(t);
    EXPECT_EQ(seg.labels[30], FrameLabel::Unvoiced);
    EXPECT_EQ(seg.labels[10], FrameLabel::Gamak);
    EXPECT_EQ(seg.labels[50], FrameLabel::Steady);
}

TEST(Segmentation, RejectsBadParameters) {
    const auto t = cents_track({0.0});
    EXPECT_THROW(segment_contour(t, {40.0, 20.0}), ArgumentError);
    EXPECT_THROW(segment_contour(t, {400.0, 0.0}), ArgumentError);
}

TEST(Segmentation, TranslationInvariant) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 15.0);
    std::vector<double> c;
    for (int i = 0; i < 2000; ++i) c.push_back((i / 150) * 100.0 + g(rng) * ((i / 300) % 2 ? 3.0 : 0.3));
    auto shifted = c;
    for (auto& v : shifted) v += 437.25;
    EXPECT_EQ(segment_contour(cents_track(c)).labels, segment_contour(cents_track(shifted)).labels);
}

TEST(StableNote, Arithmetic) {
    Segmentation s;
    s.labels.assign(600, FrameLabel::Steady);
    s.labels.insert(s.labels.end(), 400, FrameLabel::Gamak);
    s.labels.insert(s.labels.end(), 250, FrameLabel::Unvoiced);
    EXPECT_DOUBLE_EQ(stable_note_measure(s), 0.6);
    Segmentation none;
    none.labels.assign(10, FrameLabel::Unvoiced);
    EXPECT_THROW(stable_note_measure(none), UndefinedFeatureError);
}

TEST(EnergyRatio, FiveHertzModulation) {
    const auto w = sine(100, 50.0, 5.0);
    EXPECT_GE(energy_ratio(w), 0.95);
    EXPECT_NEAR(energy_ratio(w), oracle::energy_ratio(w), 1e-9);
}

TEST(EnergyRatio, TwelveHertzModulation) {
    const auto w = sine(100, 50.0, 12.0);
    EXPECT_LE(energy_ratio(w), 0.05);
    EXPECT_NEAR(energy_ratio(w), oracle::energy_ratio(w), 1e-9);
}

TEST(EnergyRatio, EqualMixture) {
    auto w = sine(100, 40.0, 5.0);
    const auto b = sine(100, 40.0, 15.0);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += b[i];
    const double er = energy_ratio(w);
    EXPECT_NEAR(er, oracle::energy_ratio(w), 1e-9);
    EXPECT_NEAR(er, 0.5, 0.05);
}

TEST(EnergyRatio, AlwaysInUnitInterval) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 30.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> w(100);
        for (auto& v : w) v = g(rng);
        const double er = energy_ratio(w);
        EXPECT_GE(er, 0.0);
        EXPECT_LE(er, 1.0);
        EXPECT_NEAR(er, oracle::energy_ratio(w), 1e-9);
    }
}

TEST(EnergyRatio, SeriesUsesOneSecondWindowsInsideGamakRuns) {
    auto v = sine(300, 60.0, 5.0);
    v.resize(400, 0.0);
    const auto t = cents_track(v);
    const auto seg = segment_contour(t);
    const auto er = energy_ratio_series(t, seg);
    std::size_t gamak = 0;
    while (gamak < seg.labels.size() && seg.labels[gamak] == FrameLabel::Gamak) ++gamak;
    EXPECT_EQ(er.values.size(), (gamak - 100) / 50 + 1);
    for (double x : er.values) EXPECT_GT(x, 0.3);
    EXPECT_DOUBLE_EQ(gamak_measure(er), 1.0);
}

TEST(GamakMeasure, Examples) {
    EXPECT_DOUBLE_EQ(gamak_measure(ErSeries{}), 0.0);
    EXPECT_DOUBLE_EQ(gamak_measure(ErSeries{{0.9, 0.9, 0.9}}), 1.0);
    EXPECT_DOUBLE_EQ(gamak_measure(ErSeries{{0.1, 0.4, 0.5, 0.2}}, 0.3), 0.5);
    EXPECT_DOUBLE_EQ(gamak_measure(ErSeries{{0.3, 0.31}}, 0.3), 0.5);
    EXPECT_THROW(gamak_measure(ErSeries{{0.5}}, 0.0), ArgumentError);
    EXPECT_THROW(gamak_measure(ErSeries{{0.5}}, 1.0), ArgumentError);
}

TEST(Haar, Examples) {
    EXPECT_EQ(haar_approximation(std::vector<double>(32, 7.5)), std::vector<double>(32, 7.5));
    std::vector<double> step(32, 0.0);
    step.insert(step.end(), 32, 200.0);
    EXPECT_EQ(haar_approximation(step), step);
    const std::vector<double> tail = {1, 2, 3, 4, 5, 6};
    EXPECT_EQ(haar_approximation(tail, 2), (std::vector<double>{2.5, 2.5, 2.5, 2.5, 5.5, 5.5}));
    EXPECT_THROW(haar_approximation(std::vector<double>{}), ArgumentError);
}

TEST(Haar, MatchesPyramid) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1200.0, 2400.0);
    std::vector<double> x(320);
    for (auto& v : x) v = u(rng);
    const auto a = haar_approximation(x);
    const auto b = oracle::haar_pyramid(x, 5);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(Haar, IdempotentAndMeanPreserving) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-500.0, 500.0);
    std::uniform_int_distribution<std::size_t> len(1, 400);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(len(rng));
        for (auto& v : x) v = u(rng);
        const auto once = haar_approximation(x);
        const auto twice = haar_approximation(once);
        for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-9);
        for (std::size_t b = 0; b + 32 <= x.size(); b += 32) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t i = b; i < b + 32; ++i) {
                s1 += x[i];
                s2 += once[i];
            }
            EXPECT_NEAR(s1, s2, 1e-8);
        }
    }
}

TEST(Transitions, Staircase) {
    std::vector<double> up;
    for (int n = 0; n < 5; ++n) up.insert(up.end(), 64, 200.0 * n);
    EXPECT_NEAR(melodic_transitions(cents_track(up)), 4.0 / 3.2, 1e-12);
    std::vector<double> down(up.rbegin(), up.rend());
    EXPECT_DOUBLE_EQ(melodic_transitions(cents_track(down)), 0.0);
    EXPECT_DOUBLE_EQ(melodic_transitions(cents_track(std::vector<double>(500, 300.0))), 0.0);
}

TEST(Transitions, ExactSemitoneDoesNotCount) {
    std::vector<double> c(32, 0.0);
    c.insert(c.end(), 32, 100.0);
    EXPECT_DOUBLE_EQ(melodic_transitions(cents_track(c)), 0.0);
}

TEST(Transitions, UnvoicedRemovedButDurationKept) {
    std::vector<double> up;
    for (int n = 0; n < 5; ++n) up.insert(up.end(), 64, 200.0 * n);
    auto t = cents_track(up);
    t.cents.insert(t.cents.begin() + 64, 80, std::nullopt);
    EXPECT_NEAR(melodic_transitions(t), 4.0 / 4.0, 1e-12);
    CentsTrack empty;
    empty.tonic_hz = 100.0;
    empty.cents.assign(10, std::nullopt);
    EXPECT_THROW(melodic_transitions(empty), UndefinedFeatureError);
}

TEST(Transitions, TranspositionInvariant) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-300.0, 1500.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> c;
        for (int n = 0; n < 30; ++n) c.insert(c.end(), 20 + static_cast<int>(rng() % 60), u(rng));
        auto shifted = c;
        for (auto& v : shifted) v += 256.0;
        EXPECT_DOUBLE_EQ(melodic_transitions(cents_track(c)), melodic_transitions(cents_track(shifted)));
    }
}

TEST(Tremolo, SixHertzOnPedestal) {
    EnergyContour e;
    for (int i = 0; i < 1000; ++i) e.energy.push_back(1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * 6.0 * i / 100.0 + 0.3));
    const double z = tremolo_feature(e);
    EXPECT_NEAR(z, 12.0, 1.0);
    EXPECT_DOUBLE_EQ(z, tremolo_oracle(e.energy));
}

TEST(Tremolo, ConstantAndRamp) {
    EnergyContour c;
    c.energy.assign(500, 2.0);
    EXPECT_DOUBLE_EQ(tremolo_feature(c), 0.0);
    EnergyContour r;
    for (int i = 0; i < 1000; ++i) r.energy.push_back(0.5 + 0.001 * i);
    EXPECT_LE(tremolo_feature(r), 1.0);
    EXPECT_DOUBLE_EQ(tremolo_feature(r), tremolo_oracle(r.energy));
}

TEST(Tremolo, ScaleInvariantAndNeedsOneSecond) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    EnergyContour e;
    for (int i = 0; i < 800; ++i) e.energy.push_back(u(rng));
    auto scaled = e;
    for (auto& v : scaled.energy) v *= 7.25;
    EXPECT_DOUBLE_EQ(tremolo_feature(e), tremolo_feature(scaled));
    EXPECT_DOUBLE_EQ(tremolo_feature(e), tremolo_oracle(e.energy));
    EnergyContour shortc;
    shortc.energy.assign(99, 1.0);
    EXPECT_THROW(tremolo_feature(shortc), UndefinedFeatureError);
}
