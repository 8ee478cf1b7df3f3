#pragma once

// Feature ranking by information gain, the full-covariance Gaussian (quadratic)
// classifier, kNN, and stratified cross-validation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "melostyle/errors.hpp"
#include "melostyle/io.hpp"
#include "melostyle/types.hpp"

namespace melostyle {

/// Rows are clips, columns are named features.
struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<std::string> clip_ids;
    Eigen::MatrixXd values;
    std::vector<Style> labels;

    std::size_t rows() const noexcept { return labels.size(); }
    std::size_t cols() const noexcept { return names.size(); }

    std::optional<std::size_t> column(const std::string& name) const {
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return j;
        return std::nullopt;
    }

    FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
        FeatureMatrix out;
        out.names = names;
        out.values.resize(static_cast<Eigen::Index>(idx.size()), values.cols());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            out.values.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(idx[r]));
            out.labels.push_back(labels[idx[r]]);
            if (!clip_ids.empty()) out.clip_ids.push_back(clip_ids[idx[r]]);
        }
        return out;
    }
};

/// Builds a matrix over `columns` from a feature table. Every requested column
/// must exist and be filled for every row.
inline FeatureMatrix to_matrix(const FeatureTable& table, const std::vector<std::string>& columns) {
    FeatureMatrix m;
    m.names = columns;
    m.labels = table.styles;
    m.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(columns.size()));
    for (const auto& c : columns)
        if (std::find(table.names.begin(), table.names.end(), c) == table.names.end())
            throw ConfigError("feature table lacks column " + c);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        m.clip_ids.push_back(table.rows[r].clip_id);
        for (std::size_t j = 0; j < columns.size(); ++j) {
            auto v = table.rows[r].get(columns[j]);
            if (!v) throw MissingDataError("clip " + table.rows[r].clip_id + " has no value for " + columns[j]);
            m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = *v;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Information gain

namespace detail {

inline double entropy_bits(std::span<const double> counts, double total) {
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) h -= (c / total) * std::log2(c / total);
    return h;
}

}  // namespace detail

/// Equal-frequency bin index per value. Cut points sit at ranks i*n/bins of the
/// sorted column; repeated cut values merge, so equal values share a bin.
inline std::vector<std::size_t> equal_frequency_bins(std::span<const double> column, std::size_t bins) {
    if (bins < 2) throw ArgumentError("information gain needs at least 2 bins");
    std::vector<double> sorted(column.begin(), column.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::vector<double> edges;
    for (std::size_t i = 1; i < bins; ++i) {
        const std::size_t pos = i * n / bins;
        if (pos == 0 || pos >= n) continue;
        const double e = sorted[pos];
        if (edges.empty() || edges.back() != e) edges.push_back(e);
    }
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), column[i]) - edges.begin());
    return out;
}

/// H(C) - H(C|X) in bits after equal-frequency discretisation of X.
inline double information_gain(std::span<const double> column, std::span<const Style> labels, std::size_t bins = 10) {
    if (column.size() != labels.size()) throw ArgumentError("column and labels differ in length");
    std::array<double, kNumStyles> class_counts{};
    for (auto s : labels) class_counts[index_of(s)] += 1.0;
    if (std::count_if(class_counts.begin(), class_counts.end(), [](double c) { return c > 0.0; }) < 2)
        throw PreconditionError("information gain needs at least two classes");

    const auto bin = equal_frequency_bins(column, bins);
    const std::size_t nb = bin.empty() ? 0 : *std::max_element(bin.begin(), bin.end()) + 1;
    std::vector<std::array<double, kNumStyles>> joint(nb, std::array<double, kNumStyles>{});
    for (std::size_t i = 0; i < bin.size(); ++i) joint[bin[i]][index_of(labels[i])] += 1.0;

    const double n = static_cast<double>(labels.size());
    const double hc = detail::entropy_bits(class_counts, n);
    double hcx = 0.0;
    for (const auto& row : joint) {
        double nx = 0.0;
        for (double c : row) nx += c;
        if (nx > 0.0) hcx += (nx / n) * detail::entropy_bits(row, nx);
    }
    return std::max(0.0, hc - hcx);
}

inline double information_gain(const FeatureMatrix& m, const std::string& feature, std::size_t bins = 10) {
    const auto j = m.column(feature);
    if (!j) throw ArgumentError("unknown feature " + feature);
    std::vector<double> col(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) col[r] = m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*j));
    return information_gain(col, m.labels, bins);
}

struct RankedFeature {
    std::string name;
    double gain;
};

/// Descending gain; ties keep registry order, then column order.
inline std::vector<RankedFeature> rank_features(const FeatureMatrix& m, std::size_t bins = 10) {
    std::vector<RankedFeature> out;
    for (const auto& name : m.names) out.push_back({name, information_gain(m, name, bins)});
    std::stable_sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        return registry_index(a.name) < registry_index(b.name);
    });
    return out;
}

/// Named feature subsets. A, B and C are the selected melodic subsets;
/// "melodic" is subset A, the final melodic model.
inline std::vector<std::string> feature_subset(const std::string& name) {
    const std::vector<std::string> a = {"ED", "MPD", "tremolo_zcr", "transitions", "tonic_distance", "gamak"};
    auto in_registry_order = [](std::vector<std::string> v) {
        std::stable_sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return registry_index(x) < registry_index(y); });
        return v;
    };
    if (name == "A" || name == "melodic") return in_registry_order(a);
    if (name == "B") {
        auto b = a;
        b.push_back("MIPD");
        return in_registry_order(b);
    }
    if (name == "C") {
        auto c = a;
        c.push_back("MIPD");
        std::erase(c, std::string("gamak"));
        return in_registry_order(c);
    }
    if (name == "all") return feature_registry();
    if (name == "timbre") return timbre_feature_names();
    if (name == "melodic+timbre") {
        auto v = in_registry_order(a);
        v.insert(v.end(), timbre_feature_names().begin(), timbre_feature_names().end());
        return v;
    }
    throw ConfigError("unknown feature subset '" + name + "' (expected A, B, C, all, melodic, timbre, melodic+timbre)");
}

// ---------------------------------------------------------------------------
// Standardisation

struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;  // population std; 1 for constant columns

    static Standardizer fit(const Eigen::MatrixXd& x) {
        Standardizer s;
        s.mean = x.colwise().mean();
        s.scale.resize(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double var = (x.col(j).array() - s.mean(j)).square().mean();
            const double sd = std::sqrt(var);
            s.scale(j) = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
        }
        return s;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        return (x.rowwise() - mean).array().rowwise() / scale.array();
    }
    Eigen::RowVectorXd apply_row(const Eigen::RowVectorXd& x) const {
        return (x - mean).array() / scale.array();
    }
};

/// Row vector of `names` pulled out of a FeatureVector.
inline Eigen::RowVectorXd feature_row(const FeatureVector& x, const std::vector<std::string>& names) {
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        auto v = x.get(names[j]);
        if (!v) throw ArgumentError("feature vector " + x.clip_id + " lacks " + names[j]);
        row(static_cast<Eigen::Index>(j)) = *v;
    }
    return row;
}

struct Prediction {
    Style label = Style::Hindustani;
    std::array<double, kNumStyles> scores{};  // posteriors (quadratic) or vote fractions (kNN)
};

// ---------------------------------------------------------------------------
// Quadratic (full-covariance Gaussian) classifier

struct QuadraticModel {
    std::vector<std::string> names;
    Standardizer standardizer;
    struct ClassModel {
        bool present = false;
        double prior = 0.0;
        Eigen::RowVectorXd mean;
        Eigen::MatrixXd cov;
        Eigen::LLT<Eigen::MatrixXd> chol;
        double log_det = 0.0;
    };
    std::array<ClassModel, kNumStyles> classes;
};

/// Per class: ML mean and covariance on standardised features, plus
/// ridge * (mean diagonal) * I. Priors are class frequencies.
inline QuadraticModel train_quadratic(const FeatureMatrix& m, double ridge = 1e-6) {
    const auto d = static_cast<std::size_t>(m.cols());
    if (m.rows() == 0 || d == 0) throw PreconditionError("empty training matrix");
    QuadraticModel model;
    model.names = m.names;
    model.standardizer = Standardizer::fit(m.values);
    const Eigen::MatrixXd z = model.standardizer.apply(m.values);

    for (auto s : kStyles) {
        std::vector<Eigen::Index> idx;
        for (std::size_t r = 0; r < m.rows(); ++r)
            if (m.labels[r] == s) idx.push_back(static_cast<Eigen::Index>(r));
        if (idx.empty()) continue;
        if (idx.size() < d + 1)
            throw PreconditionError("class " + std::string(style_name(s)) + " has " + std::to_string(idx.size()) +
                                    " rows; a full covariance over " + std::to_string(d) + " features needs at least " +
                                    std::to_string(d + 1));
        auto& cm = model.classes[index_of(s)];
        cm.present = true;
        cm.prior = static_cast<double>(idx.size()) / static_cast<double>(m.rows());
        Eigen::MatrixXd zc(static_cast<Eigen::Index>(idx.size()), z.cols());
        for (std::size_t r = 0; r < idx.size(); ++r) zc.row(static_cast<Eigen::Index>(r)) = z.row(idx[r]);
        cm.mean = zc.colwise().mean();
        const Eigen::MatrixXd centered = zc.rowwise() - cm.mean;
        cm.cov = centered.transpose() * centered / static_cast<double>(idx.size());
        const double mean_diag = cm.cov.diagonal().mean();
        cm.cov.diagonal().array() += ridge * mean_diag;
        cm.chol.compute(cm.cov);
        if (!(mean_diag > 0.0) || cm.chol.info() != Eigen::Success)
            throw NumericError("covariance of class " + std::string(style_name(s)) + " is singular after regularisation");
        const Eigen::MatrixXd L = cm.chol.matrixL();
        cm.log_det = 2.0 * L.diagonal().array().log().sum();
        if (!std::isfinite(cm.log_det))
            throw NumericError("covariance of class " + std::string(style_name(s)) + " is singular after regularisation");
    }
    return model;
}

/// Posteriors for a raw (unstandardised) feature row in the model's column order.
inline Prediction predict_quadratic(const QuadraticModel& model, const Eigen::RowVectorXd& raw) {
    if (raw.size() != static_cast<Eigen::Index>(model.names.size()))
        throw ArgumentError("feature row has the wrong number of columns");
    const Eigen::RowVectorXd z = model.standardizer.apply_row(raw);
    const double d = static_cast<double>(model.names.size());
    std::array<double, kNumStyles> logp{};
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kNumStyles; ++c) {
        const auto& cm = model.classes[c];
        if (!cm.present) {
            logp[c] = -std::numeric_limits<double>::infinity();
            continue;
        }
        const Eigen::VectorXd diff = (z - cm.mean).transpose();
        const double maha = cm.chol.matrixL().solve(diff).squaredNorm();
        logp[c] = std::log(cm.prior) - 0.5 * (d * std::log(2.0 * std::numbers::pi) + cm.log_det + maha);
        best = std::max(best, logp[c]);
    }
    Prediction p;
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumStyles; ++c) {
        p.scores[c] = std::isfinite(logp[c]) ? std::exp(logp[c] - best) : 0.0;
        sum += p.scores[c];
    }
    std::size_t arg = 0;
    for (std::size_t c = 0; c < kNumStyles; ++c) {
        p.scores[c] /= sum;
        if (p.scores[c] > p.scores[arg]) arg = c;
    }
    p.label = kStyles[arg];
    return p;
}

inline Prediction predict_quadratic(const QuadraticModel& model, const FeatureVector& x) {
    return predict_quadratic(model, feature_row(x, model.names));
}

// ---------------------------------------------------------------------------
// k nearest neighbours

/// Majority vote of the k nearest training rows (Euclidean, standardised with
/// training statistics). Distance ties go to the earlier row; vote ties to the
/// larger summed inverse distance, then registry order.
inline Prediction knn_predict(const FeatureMatrix& train, const Eigen::RowVectorXd& raw, std::size_t k = 7) {
    if (k == 0) throw ArgumentError("k must be >= 1");
    if (k > train.rows()) throw ArgumentError("k exceeds the number of training rows");
    if (raw.size() != static_cast<Eigen::Index>(train.cols())) throw ArgumentError("feature row has the wrong number of columns");
    const auto st = Standardizer::fit(train.values);
    const Eigen::MatrixXd z = st.apply(train.values);
    const Eigen::RowVectorXd q = st.apply_row(raw);

    std::vector<std::pair<double, std::size_t>> dist(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r)
        dist[r] = {(z.row(static_cast<Eigen::Index>(r)) - q).norm(), r};
    std::stable_sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::array<std::size_t, kNumStyles> votes{};
    std::array<double, kNumStyles> inv{};
    for (std::size_t i = 0; i < k; ++i) {
        const auto c = index_of(train.labels[dist[i].second]);
        ++votes[c];
        inv[c] += dist[i].first > 0.0 ? 1.0 / dist[i].first : std::numeric_limits<double>::infinity();
    }
    std::size_t arg = 0;
    for (std::size_t c = 1; c < kNumStyles; ++c)
        if (votes[c] > votes[arg] || (votes[c] == votes[arg] && inv[c] > inv[arg])) arg = c;
    Prediction p;
    p.label = kStyles[arg];
    for (std::size_t c = 0; c < kNumStyles; ++c) p.scores[c] = static_cast<double>(votes[c]) / static_cast<double>(k);
    return p;
}

inline Prediction knn_predict(const FeatureMatrix& train, const FeatureVector& x, std::size_t k = 7) {
    return knn_predict(train, feature_row(x, train.names), k);
}

// ---------------------------------------------------------------------------
// Cross-validation

enum class ClassifierKind { Quadratic, Knn };

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Quadratic;
    std::size_t k = 7;
    double ridge = 1e-6;
};

struct ClipPrediction {
    std::string clip_id;
    Style truth = Style::Hindustani;
    Prediction prediction;
    std::size_t fold = 0;
};

struct CvReport {
    struct Fold {
        std::size_t correct = 0, total = 0;
        double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
    };
    std::vector<Fold> folds;
    std::array<std::array<std::size_t, kNumStyles>, kNumStyles> confusion{};  // [true][predicted]
    std::vector<ClipPrediction> predictions;  // in input row order

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& row : confusion)
            for (auto v : row) t += v;
        return t;
    }
    std::size_t correct() const {
        std::size_t t = 0;
        for (std::size_t c = 0; c < kNumStyles; ++c) t += confusion[c][c];
        return t;
    }
    double accuracy() const { return total() ? static_cast<double>(correct()) / static_cast<double>(total()) : 0.0; }
};

/// Stratified fold id per row: each class is shuffled with the seed and dealt
/// round-robin over the folds.
inline std::vector<std::size_t> stratified_folds(std::span<const Style> labels, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> out(labels.size(), 0);
    for (auto s : kStyles) {
        std::vector<std::size_t> idx;
        for (std::size_t r = 0; r < labels.size(); ++r)
            if (labels[r] == s) idx.push_back(r);
        if (idx.empty()) continue;
        if (idx.size() < folds)
            throw PreconditionError("class " + std::string(style_name(s)) + " has " + std::to_string(idx.size()) +
                                    " rows, fewer than the " + std::to_string(folds) + " folds");
        for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng() % (i + 1)]);
        for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = i % folds;
    }
    return out;
}

inline CvReport cross_validate(const FeatureMatrix& m, const ClassifierSpec& spec, std::size_t folds = 5,
                               std::uint64_t seed = 0) {
    const auto fold_of = stratified_folds(m.labels, folds, seed);
    CvReport rep;
    rep.folds.resize(folds);
    rep.predictions.resize(m.rows());
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t r = 0; r < m.rows(); ++r) (fold_of[r] == f ? test_idx : train_idx).push_back(r);
        const auto train = m.select_rows(train_idx);
        std::optional<QuadraticModel> model;
        if (spec.kind == ClassifierKind::Quadratic) model = train_quadratic(train, spec.ridge);
        for (auto r : test_idx) {
            const Eigen::RowVectorXd x = m.values.row(static_cast<Eigen::Index>(r));
            const auto p = model ? predict_quadratic(*model, x) : knn_predict(train, x, spec.k);
            auto& cp = rep.predictions[r];
            cp.clip_id = m.clip_ids.empty() ? std::to_string(r) : m.clip_ids[r];
            cp.truth = m.labels[r];
            cp.prediction = p;
            cp.fold = f;
            ++rep.confusion[index_of(cp.truth)][index_of(p.label)];
            ++rep.folds[f].total;
            rep.folds[f].correct += p.label == cp.truth;
        }
    }
    return rep;
}

}  // namespace melostyle
