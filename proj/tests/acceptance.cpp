#include <chrono>
#include <cstdio>
#include <thread>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace melostyle;
using testutil::read_file;
using testutil::run_cli;
using testutil::TempDir;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double v, int d) { return csv::fixed(v, d); }

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

Outcome energy_ratio_fidelity() {
    Outcome o;
    const auto t0 = Clock::now();
    auto series_for = [](const std::vector<std::pair<double, double>>& parts) {
        std::vector<double> c(1000, 300.0);
        for (auto [hz, amp] : parts) {
            const auto s = testutil::sine(1000, amp, hz);
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += s[i];
        }
        const auto track = testutil::cents_track(c);
        return energy_ratio_series(track, segment_contour(track));
    };
    const auto five = series_for({{5.0, 60.0}});
    const auto twelve = series_for({{12.0, 60.0}});
    const auto mixed = series_for({{5.0, 50.0}, {15.0, 50.0}});
    o.require(five.values.size() == 19 && twelve.values.size() == 19 && mixed.values.size() == 19, "window count");
    double lo5 = 1.0, hi12 = 0.0, worst_mix = 0.0;
    for (double v : five.values) lo5 = std::min(lo5, v);
    for (double v : twelve.values) hi12 = std::max(hi12, v);
    for (double v : mixed.values) worst_mix = std::max(worst_mix, std::abs(v - 0.5));
    o.require(lo5 >= 0.95, "5 Hz min ER " + fixed(lo5, 4));
    o.require(hi12 <= 0.05, "12 Hz max ER " + fixed(hi12, 4));
    o.require(worst_mix <= 0.05, "mixture max |ER-0.5| " + fixed(worst_mix, 4));

    ErSeries all;
    for (const auto* s : {&five, &twelve, &mixed}) all.values.insert(all.values.end(), s->values.begin(), s->values.end());
    std::size_t above = 0;
    for (double v : all.values) above += v > 0.3;
    const double hand = static_cast<double>(above) / static_cast<double>(all.values.size());
    o.require(gamak_measure(all) == hand, "gamak measure differs from hand count");
    const double elapsed = seconds_since(t0);
    o.require(elapsed < 1.0, "runtime " + fixed(elapsed, 3) + " s");
    if (o.pass)
        o.detail = "ER min(5 Hz) " + fixed(lo5, 4) + ", max(12 Hz) " + fixed(hi12, 4) + ", mixture dev " +
                   fixed(worst_mix, 4) + ", gamak " + fixed(hand, 4) + ", " + fixed(elapsed, 3) + " s";
    return o;
}

Outcome haar_oracle() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> blocks(1, 40);
    std::uniform_real_distribution<double> u(-1200.0, 2400.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(32 * blocks(rng)));
        for (auto& v : x) v = u(rng);
        const auto a = haar_approximation(x, 5);
        const auto b = oracle::haar_pyramid(x, 5);
        for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    o.require(worst < 1e-9, "max abs error " + std::to_string(worst));
    if (o.pass) o.detail = "100 inputs, max abs error " + csv::fmt(worst, 3);
    return o;
}

Outcome microtonality() {
    Outcome o;
    PeakSet example;
    example.peaks = {{110.0, 1.0}, {290.0, 1.0}};
    o.require(fold_deviation(std::abs(110.0 - 290.0)) == 20.0, "fold_deviation(|110-290|)");
    o.require(mipd(example) == 20.0, "MIPD{110,290}");
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> cnt(0.0, 50.0), dev(1.0, 49.0);
    double worst_wpd = 0.0, worst_ed = 0.0;
    bool exact = true;
    for (int trial = 0; trial < 50; ++trial) {
        PeakSet p;
        p.peaks = oracle::random_peaks(rng);
        exact = exact && mipd(p) == oracle::mipd(p.peaks) && mpd(p) == oracle::mpd(p.peaks);
        worst_wpd = std::max(worst_wpd, std::abs(wpd(p) - oracle::wpd(p.peaks)));
        PitchHistogram h;
        h.folded = true;
        h.counts.resize(150);
        for (auto& c : h.counts) c = std::round(cnt(rng));
        const double d = dev(rng);
        worst_ed = std::max(worst_ed, std::abs(ed(h, d) - oracle::ed(h, d)));
    }
    o.require(exact, "MIPD/MPD mismatch");
    o.require(worst_wpd < 1e-9, "WPD error " + csv::fmt(worst_wpd, 3));
    o.require(worst_ed < 1e-9, "ED error " + csv::fmt(worst_ed, 3));
    if (o.pass)
        o.detail = "example 20 cents; 50 sets exact MIPD/MPD, WPD err " + csv::fmt(worst_wpd, 3) + ", ED err " +
                   csv::fmt(worst_ed, 3);
    return o;
}

Outcome peak_picking() {
    Outcome o;
    int ok = 0;
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        const auto t = oracle::bump_trial(1000 + trial);
        ok += oracle::peaks_match(pick_peaks(build_histogram(t.track, true)), t.centers);
    }
    o.require(ok >= 190, std::to_string(ok) + "/200 trials matched");
    if (o.pass) o.detail = std::to_string(ok) + "/200 trials matched";
    return o;
}

Outcome classifiers(const std::string& table_path) {
    Outcome o;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto m = oracle::toy3(seed);
        const auto model = train_quadratic(m);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> ux(80.0, 130.0), uy(-20.5, -19.4);
        for (int q = 0; q < 100; ++q) {
            const std::array<double, 2> x = {ux(rng), uy(rng)};
            const auto p = predict_quadratic(model, Eigen::RowVector2d(x[0], x[1]));
            const auto r = oracle::toy_oracle(m, 1e-6, x);
            for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::abs(p.scores[c] - r[c]));
        }
    }
    o.require(worst < 1e-8, "quadratic posterior error " + csv::fmt(worst, 3));

    std::size_t agree = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<std::vector<double>> rows;
        std::vector<Style> y;
        for (int i = 0; i < 50; ++i) {
            const auto c = rng() % 3;
            rows.push_back({g(rng) + static_cast<double>(c), 3.0 * g(rng)});
            y.push_back(kStyles[c]);
        }
        const auto m = oracle::matrix(rows, y);
        const auto st = Standardizer::fit(m.values);
        std::vector<std::vector<double>> z;
        for (const auto& r : rows) z.push_back({(r[0] - st.mean(0)) / st.scale(0), (r[1] - st.mean(1)) / st.scale(1)});
        for (int q = 0; q < 20; ++q) {
            const double a = g(rng) + 1.0, b = 3.0 * g(rng);
            const auto lib = knn_predict(m, Eigen::RowVector2d(a, b), 7).label;
            const auto ref = oracle::knn(z, y, {(a - st.mean(0)) / st.scale(0), (b - st.mean(1)) / st.scale(1)}, 7);
            agree += lib == ref;
            ++total;
        }
    }
    o.require(agree == total, "kNN agreement " + std::to_string(agree) + "/" + std::to_string(total));

    const auto table = load_feature_table(table_path);
    auto accuracy = [&](const std::string& subset) {
        return cross_validate(to_matrix(table, feature_subset(subset)), {}, 5, 0).accuracy();
    };
    const double a = accuracy("A"), mt = accuracy("melodic+timbre"), t = accuracy("timbre");
    o.require(table.rows.size() == 180, "corpus rows " + std::to_string(table.rows.size()));
    o.require(a >= 0.9, "subset A accuracy " + fixed(a, 4));
    o.require(mt > t, "melodic+timbre " + fixed(mt, 4) + " not above timbre " + fixed(t, 4));
    if (o.pass)
        o.detail = "posterior err " + csv::fmt(worst, 3) + ", kNN " + std::to_string(agree) + "/" + std::to_string(total) +
                   ", CV A " + fixed(a, 4) + ", melodic+timbre " + fixed(mt, 4) + " > timbre " + fixed(t, 4);
    return o;
}

Outcome statistics() {
    Outcome o;
    const double t = correlation_t(0.89, 180);
    o.require(std::abs(t - 26.19) <= 0.3, "t = " + fixed(t, 4));
    std::vector<double> x;
    std::vector<Style> y;
    for (int i = 0; i < 90; ++i) {
        y.push_back(kStyles[static_cast<std::size_t>(i % 3)]);
        x.push_back(static_cast<double>(i % 3) * 2.5);
    }
    const double ig = information_gain(x, y);
    o.require(std::abs(ig - std::log2(3.0)) <= 1e-9, "IG " + csv::fmt(ig, 12));

    auto listeners = [](std::vector<std::pair<ListenerLabel, int>> counts) {
        std::vector<ListenerResponse> rs;
        int id = 0;
        for (auto [l, n] : counts)
            for (int i = 0; i < n; ++i) rs.push_back({"c", "L" + std::to_string(id++), ListenerCategory::Amateur, l});
        return aggregate_listeners(rs, "c");
    };
    const auto unanimous = listeners({{ListenerLabel::H, 10}});
    const auto split = listeners({{ListenerLabel::H, 5}, {ListenerLabel::C, 5}});
    const auto mostly = listeners({{ListenerLabel::C, 7}, {ListenerLabel::T, 2}, {ListenerLabel::NS, 1}});
    o.require(unanimous.label == Style::Hindustani && unanimous.confidence == 100.0 / (100.0 + 0.0), "unanimous H");
    o.require(split.confidence == 50.0 / (100.0 + 50.0), "50/50 split");
    o.require(mostly.label == Style::Carnatic && mostly.confidence == 70.0 / (100.0 + 20.0), "70/20/10 split");
    o.require(classifier_confidence({1.0, 0.0, 0.0}) == 1.0 / (1.0 + 0.0), "(1,0,0)");
    const double third = 1.0 / 3.0;
    o.require(classifier_confidence({third, third, third}) == third / (1.0 + third), "uniform posteriors");
    o.require(classifier_confidence({0.6, 0.3, 0.1}) == 0.6 / (1.0 + 0.3), "(0.6,0.3,0.1)");
    if (o.pass) o.detail = "t " + fixed(t, 4) + ", IG " + csv::fmt(ig, 12) + ", confidences exact";
    return o;
}

Outcome determinism(const TempDir& dir) {
    Outcome o;
    const std::string c1 = dir / "d1", c2 = dir / "d2";
    auto ok = [&](const testutil::CliResult& r, const std::string& what) {
        o.require(r.code == 0, what + " exited " + std::to_string(r.code) + ": " + r.err);
    };
    for (const auto* c : {&c1, &c2})
        ok(run_cli("--seed 11 --out \"" + *c + "\" gen --count 36 --duration 10 --audio", dir), "gen");
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(c1)) {
        const auto name = e.path().filename().string();
        o.require(read_file(c1 + "/" + name) == read_file(c2 + "/" + name), "gen " + name + " differs");
        ++files;
    }
    std::vector<std::string> compared = {"gen (" + std::to_string(files) + " files)"};
    auto twice = [&](const std::string& name, const std::string& args) {
        const auto a = run_cli(args, dir), b = run_cli(args, dir);
        ok(a, name);
        o.require(a.out == b.out && a.err == b.err, name + " output differs");
        compared.push_back(name);
        return a;
    };
    const std::string table = dir / "det_table.csv";
    ok(run_cli("--out \"" + table + "\" extract \"" + c1 + "/manifest.csv\"", dir), "extract");
    twice("extract", "extract \"" + c1 + "/manifest.csv\" --workers 4");
    o.require(run_cli("extract \"" + c1 + "/manifest.csv\"", dir).out == read_file(table), "extract --out differs from stdout");
    twice("rank", "rank \"" + table + "\"");
    for (const auto* kind : {"quadratic", "knn"}) {
        const std::string o1 = dir / (std::string("cv1") + kind), o2 = dir / (std::string("cv2") + kind);
        for (const auto* out : {&o1, &o2})
            ok(run_cli("--set folds=3 --out \"" + *out + "\" crossval \"" + table + "\" --classifier " + kind +
                           " --subset melodic+timbre",
                       dir),
               "crossval");
        for (const auto* f : {"accuracy.csv", "confusion.csv", "predictions.csv"})
            o.require(read_file(o1 + "/" + f) == read_file(o2 + "/" + f), std::string("crossval ") + kind + " " + f);
        compared.push_back(std::string("crossval ") + kind);
    }
    const auto preds = load_predictions(dir / "cv1quadratic/predictions.csv");
    std::string responses = "clip_id,listener_id,category,label\n";
    std::mt19937_64 rng(5);
    for (const auto& p : preds)
        for (int l = 0; l < 5; ++l) {
            const bool agree = rng() % 5 != 0;
            responses += p.clip_id + ",L" + std::to_string(l) + ",Trained>10y," +
                         std::string(agree ? style_code(p.predicted) : style_code(kStyles[rng() % 3])) + "\n";
        }
    testutil::write_file(dir / "responses.csv", responses);
    twice("agree", "agree \"" + dir / "cv1quadratic/predictions.csv" + "\" \"" + dir / "responses.csv" + "\"");
    double t001_tonic = 0.0;
    for (const auto& r : load_dataset(c1 + "/manifest.csv"))
        if (r.clip_id == "T001") t001_tonic = r.tonic_hz;
    for (const auto* w : {"s1.wav", "s2.wav"})
        ok(run_cli("--out \"" + dir / w + "\" synth \"" + c1 + "/T001.pitch.csv\" \"" + c1 + "/T001.energy.csv\" --tonic " +
                       csv::fmt(t001_tonic),
                   dir),
           "synth");
    o.require(read_file(dir / "s1.wav") == read_file(dir / "s2.wav") && !read_file(dir / "s1.wav").empty(), "synth differs");
    compared.push_back("synth");
    if (o.pass) {
        o.detail = "byte-identical:";
        for (const auto& c : compared) o.detail += " " + c + ",";
        o.detail.pop_back();
    }
    return o;
}

Outcome end_to_end(const TempDir& dir, std::string& table_out) {
    Outcome o;
    const std::string corpus = dir / "e2e";
    table_out = dir / "e2e_table.csv";
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    const auto t0 = Clock::now();
    const auto g = run_cli("--seed 0 --out \"" + corpus + "\" gen --count 60 --duration 30 --audio", dir);
    const double t_gen = seconds_since(t0);
    const auto e = run_cli("--out \"" + table_out + "\" extract \"" + corpus + "/manifest.csv\" --workers " + std::to_string(workers), dir);
    const double t_ext = seconds_since(t0) - t_gen;
    const auto c = run_cli("--out \"" + dir / "e2e_cv" + "\" crossval \"" + table_out + "\"", dir);
    const double total = seconds_since(t0);
    o.require(g.code == 0, "gen failed: " + g.err);
    o.require(e.code == 0, "extract failed: " + e.err);
    o.require(c.code == 0, "crossval failed: " + c.err);
    o.require(total < 300.0, "took " + fixed(total, 1) + " s");
    if (o.pass)
        o.detail = fixed(total, 1) + " s (gen " + fixed(t_gen, 1) + ", extract " + fixed(t_ext, 1) + " on " +
                   std::to_string(workers) + " workers, crossval " + fixed(total - t_gen - t_ext, 1) + "); " +
                   first_line(c.out);
    return o;
}

}  // namespace

int main() {
    TempDir dir("acceptance");
    std::array<Outcome, 8> results;
    std::string table;
    auto guarded = [](auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            Outcome o;
            o.require(false, std::string("exception: ") + e.what());
            return o;
        }
    };
    results[7] = guarded([&] { return end_to_end(dir, table); });
    results[0] = guarded(energy_ratio_fidelity);
    results[1] = guarded(haar_oracle);
    results[2] = guarded(microtonality);
    results[3] = guarded(peak_picking);
    results[4] = guarded([&] { return classifiers(table); });
    results[5] = guarded(statistics);
    results[6] = guarded([&] { return determinism(dir); });

    const std::array<const char*, 8> names = {"energy ratio and gamak measure", "Haar approximation oracle",
                                              "microtonality formulas",         "peak picking",
                                              "classifier correctness",         "statistics",
                                              "CLI determinism",                "end-to-end runtime"};
    int failed = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        std::printf("criterion %zu %s: %s (%s)\n", i + 1, results[i].pass ? "PASS" : "FAIL", names[i],
                    results[i].detail.c_str());
        failed += !results[i].pass;
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
