#pragma once

// Text reports: cross-validation tables, per-clip predictions, feature
// rankings and the listener/classifier agreement report.

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "melostyle/agreement.hpp"
#include "melostyle/csv.hpp"
#include "melostyle/errors.hpp"
#include "melostyle/stats.hpp"
#include "melostyle/types.hpp"

namespace melostyle {

inline std::string format_accuracy(const CvReport& rep) {
    std::string out = "fold,correct,total,accuracy\n";
    for (std::size_t f = 0; f < rep.folds.size(); ++f)
        out += std::to_string(f + 1) + "," + std::to_string(rep.folds[f].correct) + "," +
               std::to_string(rep.folds[f].total) + "," + csv::fmt(rep.folds[f].accuracy()) + "\n";
    out += "overall," + std::to_string(rep.correct()) + "," + std::to_string(rep.total()) + "," +
           csv::fmt(rep.accuracy()) + "\n";
    return out;
}

/// Rows are true styles, columns predicted styles.
inline std::string format_confusion(const CvReport& rep) {
    std::string out = "true";
    for (auto s : kStyles) out += "," + std::string(style_code(s));
    out += "\n";
    for (auto t : kStyles) {
        out += std::string(style_code(t));
        for (auto p : kStyles) out += "," + std::to_string(rep.confusion[index_of(t)][index_of(p)]);
        out += "\n";
    }
    return out;
}

inline const std::vector<std::string>& predictions_header() {
    static const std::vector<std::string> h = {"clip_id", "true", "predicted", "p_H", "p_C", "p_T", "confidence"};
    return h;
}

inline std::string format_predictions(const CvReport& rep) {
    std::string out = csv::join(predictions_header()) + "\n";
    for (const auto& p : rep.predictions) {
        out += p.clip_id + "," + std::string(style_code(p.truth)) + "," + std::string(style_code(p.prediction.label));
        for (double s : p.prediction.scores) out += "," + csv::fmt(s, 17);
        out += "," + csv::fmt(classifier_confidence(p.prediction.scores)) + "\n";
    }
    return out;
}

struct PredictionRow {
    std::string clip_id;
    Style truth = Style::Hindustani;
    Style predicted = Style::Hindustani;
    std::array<double, kNumStyles> scores{};
};

inline std::vector<PredictionRow> load_predictions(const std::string& path) {
    const auto t = csv::read_file(path);
    for (const auto& col : {"clip_id", "true", "predicted", "p_H", "p_C", "p_T"})
        if (!t.column(col)) throw FormatError(path + ": predictions file lacks column '" + std::string(col) + "'");
    const auto ci = *t.column("clip_id"), ti = *t.column("true"), pi = *t.column("predicted");
    const std::array<std::size_t, kNumStyles> si = {*t.column("p_H"), *t.column("p_C"), *t.column("p_T")};
    std::vector<PredictionRow> out;
    std::set<std::string> seen;
    for (const auto& row : t.rows) {
        PredictionRow r;
        r.clip_id = row.cells[ci];
        if (!seen.insert(r.clip_id).second)
            throw ParseError(path + ": duplicate clip_id " + r.clip_id, row.line);
        const auto truth = parse_style(row.cells[ti]), pred = parse_style(row.cells[pi]);
        if (!truth || !pred) throw ParseError(path + ": unknown style label", row.line);
        r.truth = *truth;
        r.predicted = *pred;
        for (std::size_t k = 0; k < kNumStyles; ++k) {
            const auto v = csv::to_double(row.cells[si[k]]);
            if (!v) throw ParseError(path + ": non-numeric score '" + row.cells[si[k]] + "'", row.line);
            r.scores[k] = *v;
        }
        out.push_back(r);
    }
    return out;
}

inline std::string format_ranking(const std::vector<RankedFeature>& ranked) {
    std::string out = "feature,gain\n";
    for (const auto& r : ranked) out += r.name + "," + csv::fmt(r.gain, 12) + "\n";
    return out;
}

struct AgreementRow {
    LabeledConfidence listeners;
    LabeledConfidence classifier;
};

struct AgreementReport {
    std::vector<AgreementRow> rows;  // predictions-file order
    CorrelationResult correlation;
    std::array<std::size_t, kNumListenerCategories> listeners_per_category{};
};

/// Pairs every predicted clip with its listener majority; the clip sets must match exactly.
inline AgreementReport build_agreement(const std::vector<PredictionRow>& predictions,
                                       const std::vector<ListenerResponse>& responses) {
    std::set<std::string> pred_ids, resp_ids;
    for (const auto& p : predictions) pred_ids.insert(p.clip_id);
    for (const auto& r : responses) resp_ids.insert(r.clip_id);
    std::vector<std::string> missing;
    for (const auto& p : predictions)
        if (!resp_ids.contains(p.clip_id)) missing.push_back(p.clip_id + " (no listener responses)");
    for (const auto& id : resp_ids)
        if (!pred_ids.contains(id)) missing.push_back(id + " (no prediction)");
    if (!missing.empty()) {
        std::string msg = "clip sets differ; unmatched ids:";
        for (const auto& m : missing) msg += " " + m;
        throw ValidationError(msg);
    }

    AgreementReport rep;
    std::vector<LabeledConfidence> lis, cls;
    for (const auto& p : predictions) {
        AgreementRow row;
        row.listeners = aggregate_listeners(responses, p.clip_id);
        row.classifier.clip_id = p.clip_id;
        row.classifier.label = p.predicted;
        row.classifier.confidence = classifier_confidence(p.scores);
        row.classifier.source = LabelSource::Classifier;
        lis.push_back(row.listeners);
        cls.push_back(row.classifier);
        rep.rows.push_back(row);
    }
    rep.correlation = label_correlation(lis, cls);

    std::map<std::string, ListenerCategory> listener_cat;
    for (const auto& r : responses) listener_cat.emplace(r.listener_id, r.category);
    for (const auto& [_, c] : listener_cat) ++rep.listeners_per_category[static_cast<std::size_t>(c)];
    return rep;
}

inline std::string format_agreement(const AgreementReport& rep) {
    std::string out = "clip_id,listener_label,listener_conf,classifier_label,classifier_conf\n";
    for (const auto& r : rep.rows)
        out += r.listeners.clip_id + "," + std::string(style_code(r.listeners.label)) + "," +
               csv::fmt(r.listeners.confidence) + "," + std::string(style_code(r.classifier.label)) + "," +
               csv::fmt(r.classifier.confidence) + "\n";
    out += "\nstatistic,value\n";
    out += "r," + csv::fmt(rep.correlation.r) + "\n";
    out += "t," + csv::fmt(rep.correlation.t) + "\n";
    out += "n," + std::to_string(rep.correlation.n) + "\n";
    out += "critical_t," + csv::fmt(kCriticalT) + "\n";
    out += "verdict," + rep.correlation.verdict() + "\n";
    out += "\ncategory,listeners\n";
    for (std::size_t c = 0; c < kNumListenerCategories; ++c)
        out += std::string(category_token(static_cast<ListenerCategory>(c))) + "," +
               std::to_string(rep.listeners_per_category[c]) + "\n";
    return out;
}

}  // namespace melostyle
