/**
 * @file
 * Classification metrics: confusion matrix, per-class precision / recall /
 * F1, accuracy, macro and weighted averages, one-vs-rest ROC AUC and
 * Cohen's kappa.
 */
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace hyquc::metrics {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::string> class_names;

    std::size_t n_classes() const noexcept { return counts.size(); }
    std::size_t total() const;
    std::size_t row_sum(std::size_t c) const;
    std::size_t col_sum(std::size_t c) const;
    std::size_t trace() const;
};

ConfusionMatrix confusion_matrix(std::span<const std::size_t> y_true,
                                 std::span<const std::size_t> y_pred, std::size_t n_classes,
                                 std::vector<std::string> class_names = {});

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    /// Set when any of the three ratios hit a zero denominator and was
    /// reported as 0.
    bool zero_division = false;
};

ClassScores per_class_prf(const ConfusionMatrix &cm, std::size_t cls);

double accuracy(const ConfusionMatrix &cm);

struct Averages {
    double macro = 0.0;
    double weighted = 0.0;
};

Averages macro_weighted_avg(std::span<const double> values, std::span<const std::size_t> supports);

/// Per-class one-vs-rest AUC in the Mann-Whitney form. A class with no
/// positives or no negatives yields nullopt.
///
/// `scores` is row-major [n_samples x n_classes].
std::vector<std::optional<double>> roc_auc_ovr(std::span<const double> scores,
                                               std::size_t n_classes,
                                               std::span<const std::size_t> y_true);

struct Kappa {
    double value = 0.0;
    bool degenerate = false;
};

Kappa cohens_kappa(const ConfusionMatrix &cm);

struct MetricsReport {
    std::vector<std::string> class_names;
    std::vector<ClassScores> per_class;
    double accuracy = 0.0;
    ClassScores macro;    // support holds the total
    ClassScores weighted; // support holds the total
    std::vector<std::optional<double>> roc_auc;
    Kappa kappa;
    std::vector<std::vector<std::size_t>> confusion;
    /// Caller-supplied extras such as train/validation/test accuracy.
    std::map<std::string, double> additional;

    nlohmann::ordered_json to_json() const;
    static MetricsReport from_json(const nlohmann::ordered_json &doc);

    bool operator==(const MetricsReport &other) const;
};

MetricsReport build_report(const ConfusionMatrix &cm, std::span<const double> scores,
                           std::span<const std::size_t> y_true);

} // namespace hyquc::metrics
