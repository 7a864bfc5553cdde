#include "hyquc/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "hyquc/error.hpp"

namespace hyquc::metrics {

namespace {

double ratio(std::size_t num, std::size_t den, bool &zero_division) {
    if (den == 0) {
        zero_division = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

void require_nonempty(const ConfusionMatrix &cm) {
    if (cm.n_classes() == 0 || cm.total() == 0)
        throw ArgumentError("confusion matrix is empty");
}

nlohmann::ordered_json scores_json(const ClassScores &s) {
    nlohmann::ordered_json j;
    j["precision"] = s.precision;
    j["recall"] = s.recall;
    j["f1"] = s.f1;
    j["support"] = s.support;
    j["zero_division"] = s.zero_division;
    return j;
}

ClassScores scores_from_json(const nlohmann::ordered_json &j) {
    ClassScores s;
    s.precision = j.at("precision").get<double>();
    s.recall = j.at("recall").get<double>();
    s.f1 = j.at("f1").get<double>();
    s.support = j.at("support").get<std::size_t>();
    s.zero_division = j.at("zero_division").get<bool>();
    return s;
}

bool same(const ClassScores &a, const ClassScores &b) {
    return a.precision == b.precision && a.recall == b.recall && a.f1 == b.f1 &&
           a.support == b.support && a.zero_division == b.zero_division;
}

} // namespace

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const auto &row : counts)
        t += std::accumulate(row.begin(), row.end(), std::size_t{0});
    return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t c) const {
    return std::accumulate(counts.at(c).begin(), counts.at(c).end(), std::size_t{0});
}

std::size_t ConfusionMatrix::col_sum(std::size_t c) const {
    std::size_t t = 0;
    for (const auto &row : counts)
        t += row.at(c);
    return t;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t c = 0; c < counts.size(); ++c)
        t += counts[c][c];
    return t;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> y_true,
                                 std::span<const std::size_t> y_pred, std::size_t n_classes,
                                 std::vector<std::string> class_names) {
    if (y_true.size() != y_pred.size())
        throw ShapeError("y_true has " + std::to_string(y_true.size()) + " labels, y_pred has " +
                         std::to_string(y_pred.size()));
    if (class_names.empty())
        for (std::size_t c = 0; c < n_classes; ++c)
            class_names.push_back(std::to_string(c));
    if (class_names.size() != n_classes)
        throw ShapeError("class name count does not match n_classes");
    ConfusionMatrix cm;
    cm.counts.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
    cm.class_names = std::move(class_names);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] >= n_classes || y_pred[i] >= n_classes)
            throw IndexError("label out of range at position " + std::to_string(i));
        ++cm.counts[y_true[i]][y_pred[i]];
    }
    return cm;
}

ClassScores per_class_prf(const ConfusionMatrix &cm, std::size_t cls) {
    if (cls >= cm.n_classes())
        throw IndexError("class " + std::to_string(cls) + " out of range");
    const std::size_t tp = cm.counts[cls][cls];
    ClassScores s;
    s.support = cm.row_sum(cls);
    s.precision = ratio(tp, cm.col_sum(cls), s.zero_division);
    s.recall = ratio(tp, s.support, s.zero_division);
    const double pr = s.precision + s.recall;
    if (pr > 0.0) {
        s.f1 = 2.0 * s.precision * s.recall / pr;
    } else {
        s.f1 = 0.0;
        s.zero_division = true;
    }
    return s;
}

double accuracy(const ConfusionMatrix &cm) {
    require_nonempty(cm);
    return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

Averages macro_weighted_avg(std::span<const double> values,
                            std::span<const std::size_t> supports) {
    if (values.empty())
        throw ArgumentError("cannot average an empty list");
    if (values.size() != supports.size())
        throw ShapeError("values and supports differ in length");
    Averages avg;
    double weighted = 0.0;
    std::size_t total = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        avg.macro += values[i];
        weighted += values[i] * static_cast<double>(supports[i]);
        total += supports[i];
    }
    avg.macro /= static_cast<double>(values.size());
    avg.weighted = total > 0 ? weighted / static_cast<double>(total) : 0.0;
    return avg;
}

std::vector<std::optional<double>> roc_auc_ovr(std::span<const double> scores,
                                               std::size_t n_classes,
                                               std::span<const std::size_t> y_true) {
    const std::size_t n = y_true.size();
    if (scores.size() != n * n_classes)
        throw ShapeError("score matrix must be n_samples x n_classes");
    std::vector<std::optional<double>> out(n_classes);
    std::vector<std::size_t> order(n);
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores[a * n_classes + c] < scores[b * n_classes + c];
        });
        // Twice the rank sum of the positives, with tied groups sharing the
        // average rank; kept integral so the result is exact.
        std::uint64_t twice_rank_sum = 0;
        std::uint64_t positives = 0;
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            const double v = scores[order[i] * n_classes + c];
            std::uint64_t group_pos = 0;
            while (j < n && scores[order[j] * n_classes + c] == v) {
                if (y_true[order[j]] == c)
                    ++group_pos;
                ++j;
            }
            // ranks i+1 .. j, average (i + 1 + j) / 2
            twice_rank_sum += group_pos * static_cast<std::uint64_t>(i + 1 + j);
            positives += group_pos;
            i = j;
        }
        const std::uint64_t negatives = n - positives;
        if (positives == 0 || negatives == 0)
            continue;
        const std::uint64_t numerator = twice_rank_sum - positives * (positives + 1);
        out[c] = static_cast<double>(numerator) /
                 static_cast<double>(2 * positives * negatives);
    }
    return out;
}

Kappa cohens_kappa(const ConfusionMatrix &cm) {
    require_nonempty(cm);
    const double total = static_cast<double>(cm.total());
    const double observed = static_cast<double>(cm.trace()) / total;
    double expected = 0.0;
    for (std::size_t c = 0; c < cm.n_classes(); ++c)
        expected += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
    expected /= total * total;
    Kappa k;
    if (expected == 1.0) {
        k.degenerate = true;
        k.value = observed == 1.0 ? 1.0 : 0.0;
        return k;
    }
    k.value = (observed - expected) / (1.0 - expected);
    return k;
}

MetricsReport build_report(const ConfusionMatrix &cm, std::span<const double> scores,
                           std::span<const std::size_t> y_true) {
    require_nonempty(cm);
    if (y_true.size() != cm.total())
        throw ShapeError("label count does not match the confusion matrix total");
    MetricsReport r;
    r.class_names = cm.class_names;
    r.confusion = cm.counts;
    std::vector<double> p, rc, f;
    std::vector<std::size_t> support;
    for (std::size_t c = 0; c < cm.n_classes(); ++c) {
        r.per_class.push_back(per_class_prf(cm, c));
        p.push_back(r.per_class.back().precision);
        rc.push_back(r.per_class.back().recall);
        f.push_back(r.per_class.back().f1);
        support.push_back(r.per_class.back().support);
    }
    r.accuracy = accuracy(cm);
    const auto ap = macro_weighted_avg(p, support);
    const auto ar = macro_weighted_avg(rc, support);
    const auto af = macro_weighted_avg(f, support);
    r.macro = {ap.macro, ar.macro, af.macro, cm.total(), false};
    r.weighted = {ap.weighted, ar.weighted, af.weighted, cm.total(), false};
    r.roc_auc = roc_auc_ovr(scores, cm.n_classes(), y_true);
    r.kappa = cohens_kappa(cm);
    return r;
}

nlohmann::ordered_json MetricsReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["format"] = "hyquc-metrics";
    doc["version"] = 1;
    doc["classes"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        auto entry = scores_json(per_class[c]);
        entry["name"] = class_names[c];
        doc["classes"].push_back(entry);
    }
    doc["accuracy"] = accuracy;
    doc["macro_avg"] = scores_json(macro);
    doc["weighted_avg"] = scores_json(weighted);
    auto auc = nlohmann::ordered_json::array();
    for (const auto &a : roc_auc)
        auc.push_back(a ? nlohmann::ordered_json(*a) : nlohmann::ordered_json(nullptr));
    doc["roc_auc"] = auc;
    doc["cohens_kappa"] = kappa.value;
    doc["kappa_degenerate"] = kappa.degenerate;
    doc["confusion_matrix"] = confusion;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    for (const auto &[key, value] : additional)
        extra[key] = value;
    doc["additional"] = extra;
    return doc;
}

MetricsReport MetricsReport::from_json(const nlohmann::ordered_json &doc) {
    try {
        if (doc.at("format").get<std::string>() != "hyquc-metrics")
            throw FormatError("not a metrics document");
        MetricsReport r;
        for (const auto &entry : doc.at("classes")) {
            r.class_names.push_back(entry.at("name").get<std::string>());
            r.per_class.push_back(scores_from_json(entry));
        }
        r.accuracy = doc.at("accuracy").get<double>();
        r.macro = scores_from_json(doc.at("macro_avg"));
        r.weighted = scores_from_json(doc.at("weighted_avg"));
        for (const auto &a : doc.at("roc_auc"))
            r.roc_auc.push_back(a.is_null() ? std::nullopt : std::optional<double>(a.get<double>()));
        r.kappa.value = doc.at("cohens_kappa").get<double>();
        r.kappa.degenerate = doc.at("kappa_degenerate").get<bool>();
        r.confusion = doc.at("confusion_matrix").get<std::vector<std::vector<std::size_t>>>();
        for (const auto &[key, value] : doc.at("additional").items())
            r.additional[key] = value.get<double>();
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(std::string("malformed metrics document: ") + e.what());
    }
}

bool MetricsReport::operator==(const MetricsReport &other) const {
    if (per_class.size() != other.per_class.size())
        return false;
    for (std::size_t c = 0; c < per_class.size(); ++c)
        if (!same(per_class[c], other.per_class[c]))
            return false;
    return class_names == other.class_names && accuracy == other.accuracy &&
           same(macro, other.macro) && same(weighted, other.weighted) &&
           roc_auc == other.roc_auc && kappa.value == other.kappa.value &&
           kappa.degenerate == other.kappa.degenerate && confusion == other.confusion &&
           additional == other.additional;
}

} // namespace hyquc::metrics
