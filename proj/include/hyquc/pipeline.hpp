/**
 * @file
 * Per-row-type preprocessing as one fitted, replayable unit, and the
 * versioned model document that stores it next to the trained model.
 */
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hyquc/hybrid.hpp"
#include "hyquc/rtdpa.hpp"

namespace hyquc {
class Rng;
}

namespace hyquc::pipeline {

using Json = nlohmann::ordered_json;

inline constexpr int kModelFormatVersion = 1;

/// Everything fitted on the training rows of one row type; applying it to
/// new rows replays the same drops, encodings, projection and scaling.
struct FittedPipeline {
    std::string row_type;
    std::string row_type_column;
    std::string label_column;
    std::vector<std::string> row_type_codes;
    rtdpa::LabelMap labels;
    rtdpa::TabularEncoder encoder;
    rtdpa::PCAModel pca;
    rtdpa::AngleScaler scaler;

    /// Angle-scaled features, one row per input row.
    Eigen::MatrixXd features(const rtdpa::TabularDataset &rows) const;
    /// Features plus encoded labels.
    rtdpa::RowTypeDataset apply(const rtdpa::TabularDataset &rows) const;
    /// Columns an input table must provide (features only).
    std::vector<std::string> required_columns() const { return encoder.required_columns(); }

    Json to_json() const;
    static FittedPipeline from_json(const Json &doc);
};

struct PreprocessConfig {
    std::vector<std::string> excluded_columns;
    double missing_threshold = 0.70;
    /// raw label value -> class name, in class order; empty = infer.
    std::vector<std::pair<std::string, std::string>> classes;
    /// (from, into) class consolidations applied in order.
    std::vector<std::pair<std::string, std::string>> merges;
    rtdpa::EncodeOptions encode;
    /// 0 selects the scree elbow.
    std::size_t pca_components = 5;
    std::size_t pca_cap = qsim::kMaxQubits;
    std::array<double, 3> split{0.70, 0.15, 0.15};
    /// 0 disables SMOTE.
    std::size_t smote_k = 5;
};

struct PreparedRowType {
    FittedPipeline pipeline;
    rtdpa::RowTypeDataset train; // scaled and rebalanced
    rtdpa::RowTypeDataset validation;
    rtdpa::RowTypeDataset test;
    /// Training rows after encoding, before projection (grid-search input).
    rtdpa::RowTypeDataset encoded_train;
    rtdpa::TabularDataset test_rows;
    rtdpa::PreprocessReport report;
};

/// drop inapplicable -> drop mostly-missing -> labels and merges ->
/// stratified split -> encode (fit on train) -> PCA (fit on train) ->
/// angle scaling (fit on train) -> SMOTE on train only.
PreparedRowType prepare_row_type(const rtdpa::TabularDataset &rows, const std::string &row_type,
                                 std::vector<std::string> row_type_codes,
                                 const PreprocessConfig &config, Rng &rng);

struct ModelBundle {
    hybrid::HybridModel model;
    FittedPipeline pipeline;

    Json to_json() const;
    static ModelBundle from_json(const Json &doc);

    static ModelBundle read(const std::filesystem::path &path);
};

} // namespace hyquc::pipeline
