/**
 * @file
 * Row-type dependent preprocessing: partition a table by row type, drop
 * inapplicable and mostly-missing columns, impute and encode, consolidate
 * classes, project with PCA, scale to rotation angles and rebalance with
 * SMOTE.
 *
 * Every fitted stage (encoder, PCA, scaler) is immutable after fitting and
 * can be replayed on validation, test or prediction rows.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace hyquc {
class Rng;
}

namespace hyquc::rtdpa {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Raw tables

/// nullopt marks a missing cell.
using Cell = std::optional<std::string>;

bool is_missing_token(std::string_view text);

struct TabularDataset {
    std::vector<std::string> column_names;
    std::vector<std::vector<Cell>> rows;
    std::string label_column = "IRAC";
    std::string row_type_column;

    std::size_t n_rows() const noexcept { return rows.size(); }
    std::size_t n_cols() const noexcept { return column_names.size(); }

    std::optional<std::size_t> find_column(std::string_view name) const;
    /// Throws SchemaError naming the column when absent.
    std::size_t column_index(std::string_view name) const;

    TabularDataset select_rows(std::span<const std::size_t> indices) const;
    TabularDataset drop_columns(std::span<const std::string> names) const;
    /// Keeps `names` in the given order; throws SchemaError listing every
    /// absent column.
    TabularDataset project_columns(std::span<const std::string> names) const;
};

TabularDataset parse_csv(std::istream &in, std::string label_column = "IRAC",
                         std::string row_type_column = {});
TabularDataset read_csv(const std::filesystem::path &path, std::string label_column = "IRAC",
                        std::string row_type_column = {});
void write_csv(std::ostream &out, const TabularDataset &data);

/// Groups raw row-type codes into named row types. Text form: one
/// `code = row_type` per line, `#` starts a comment.
class RowTypeMap {
public:
    static RowTypeMap parse(std::istream &in);
    static RowTypeMap read(const std::filesystem::path &path);

    void add(std::string code, std::string row_type);
    /// Throws SchemaError naming an unknown code.
    const std::string &resolve(const std::string &code) const;
    bool contains(const std::string &code) const { return codes_.count(code) != 0; }
    bool empty() const noexcept { return codes_.empty(); }
    std::vector<std::string> codes_for(const std::string &row_type) const;
    const std::map<std::string, std::string> &entries() const noexcept { return codes_; }

private:
    std::map<std::string, std::string> codes_;
};

/// Disjoint cover of the input rows keyed by row type. Without a map the
/// raw value of the row-type column is the row type.
std::map<std::string, TabularDataset> partition_by_row_type(const TabularDataset &data,
                                                            const RowTypeMap *map = nullptr);

// ---------------------------------------------------------------------------
// Audit trail

struct DroppedColumn {
    std::string name;
    std::size_t missing = 0;
    double fraction = 0.0;
};

struct PreprocessReport {
    std::string row_type;
    std::size_t input_rows = 0;
    std::vector<std::string> inapplicable_dropped;
    std::vector<DroppedColumn> missing_dropped;
    std::vector<std::string> empty_dropped;
    std::vector<std::pair<std::string, std::string>> merged_classes;
    std::size_t requested_components = 0;
    std::size_t applied_components = 0;
    std::size_t available_components = 0;
    std::vector<double> explained_variance;
    std::array<std::size_t, 3> split_sizes{};
    std::map<std::string, std::size_t> counts_before_smote;
    std::map<std::string, std::size_t> counts_after_smote;
    std::vector<std::string> notes;

    Json to_json() const;
};

TabularDataset drop_inapplicable_columns(const TabularDataset &data,
                                         std::span<const std::string> excluded,
                                         PreprocessReport *report = nullptr);

struct MissingDropResult {
    TabularDataset data;
    std::vector<DroppedColumn> dropped;
};

/// Removes every feature column whose missing fraction exceeds `threshold`.
/// Label and row-type columns are never dropped.
MissingDropResult drop_high_missing(const TabularDataset &data, double threshold = 0.70);

// ---------------------------------------------------------------------------
// Encoded data

struct RowTypeDataset {
    std::string row_type;
    Eigen::MatrixXd X; // n x d
    std::vector<std::size_t> y;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;

    std::size_t n_rows() const noexcept { return y.size(); }
    std::size_t n_features() const noexcept { return static_cast<std::size_t>(X.cols()); }
    std::size_t n_classes() const noexcept { return class_names.size(); }
    std::vector<std::size_t> class_counts() const;

    RowTypeDataset select_rows(std::span<const std::size_t> indices) const;
    void validate() const;
};

/// Raw label value -> class index, including any consolidations.
class LabelMap {
public:
    /// `declared` pairs raw values with class names in class order; when
    /// empty, the distinct raw labels (numerically sorted when all numeric)
    /// become the classes.
    static LabelMap fit(const TabularDataset &data,
                        const std::vector<std::pair<std::string, std::string>> &declared = {});

    const std::vector<std::string> &class_names() const noexcept { return class_names_; }
    std::size_t n_classes() const noexcept { return class_names_.size(); }
    /// Throws SchemaError for unknown raw labels.
    std::size_t encode(const std::string &raw) const;
    std::optional<std::size_t> find_class(const std::string &name) const;

    /// Relabels raw values of `from` as `into`; shrinks the class list.
    void merge(const std::string &from, const std::string &into);

    Json to_json() const;
    static LabelMap from_json(const Json &doc);

private:
    std::vector<std::string> class_names_;
    std::map<std::string, std::size_t> raw_to_class_;
};

enum class ColumnKind { Numeric, Date, Categorical };

struct ColumnEncoding {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    double median = 0.0;
    double clip_low = -std::numeric_limits<double>::infinity();
    double clip_high = std::numeric_limits<double>::infinity();
    std::vector<std::string> categories; // excludes the missing category
};

struct EncodeOptions {
    std::string date_format = "%Y-%m-%d";
    /// Clip numeric columns at the 1st / 99th training percentiles.
    bool winsorize = false;
    /// Columns ignored as features (e.g. row identifiers).
    std::vector<std::string> ignored_columns;
};

inline constexpr const char *kMissingCategory = "__missing__";

/// Median imputation for numeric and date columns, one-hot encoding with an
/// explicit missing category for everything else.
class TabularEncoder {
public:
    static TabularEncoder fit(const TabularDataset &data, const EncodeOptions &options = {},
                              PreprocessReport *report = nullptr);

    /// Encodes features and labels. Throws SchemaError listing every
    /// required column absent from `data`.
    RowTypeDataset transform(const TabularDataset &data, const LabelMap &labels,
                             const std::string &row_type = {}) const;
    /// Features only, for rows without labels.
    Eigen::MatrixXd transform_features(const TabularDataset &data) const;

    std::vector<std::string> required_columns() const;
    const std::vector<std::string> &feature_names() const noexcept { return feature_names_; }
    const std::vector<ColumnEncoding> &columns() const noexcept { return columns_; }

    Json to_json() const;
    static TabularEncoder from_json(const Json &doc);

private:
    std::vector<ColumnEncoding> columns_;
    std::vector<std::string> feature_names_;
    std::string date_format_;
};

/// Days since 1970-01-01 for `text` parsed with a strftime-style format.
std::optional<double> parse_date(const std::string &text, const std::string &format);

RowTypeDataset impute_and_encode(const TabularDataset &data, const LabelMap &labels,
                                 const EncodeOptions &options = {},
                                 PreprocessReport *report = nullptr);

/// Folds class `from` into `into` (by name); classes after `from` shift
/// down one index.
RowTypeDataset merge_minority_class(const RowTypeDataset &ds, const std::string &from,
                                    const std::string &into);

// ---------------------------------------------------------------------------
// Projection and scaling

struct PCAModel {
    Eigen::VectorXd mean;               // d
    Eigen::MatrixXd components;         // k x d, orthonormal rows
    Eigen::VectorXd explained_variance; // k, descending

    std::size_t n_components() const noexcept {
        return static_cast<std::size_t>(components.rows());
    }
    std::size_t n_features() const noexcept { return static_cast<std::size_t>(mean.size()); }

    /// Leading `k` components.
    PCAModel truncated(std::size_t k) const;

    Json to_json() const;
    static PCAModel from_json(const Json &doc);
};

/// Eigendecomposition of the sample covariance (n - 1 denominator). Each
/// component's largest-magnitude entry is made positive.
PCAModel pca_fit(const Eigen::MatrixXd &X, std::size_t k);

Eigen::MatrixXd pca_transform(const PCAModel &model, const Eigen::MatrixXd &X);
Eigen::MatrixXd pca_inverse_transform(const PCAModel &model, const Eigen::MatrixXd &Z);

/// min(requested, cap, available).
std::size_t select_components(const PCAModel &model, std::size_t requested, std::size_t cap);

/// Knee of a scree curve: the index (1-based count) whose point lies
/// farthest from the chord joining the first and last eigenvalues.
std::size_t scree_elbow(std::span<const double> eigenvalues);

/// Per-column affine map onto [0, pi] fitted on training rows.
struct AngleScaler {
    Eigen::VectorXd min;
    Eigen::VectorXd max;

    static AngleScaler fit(const Eigen::MatrixXd &X);
    /// Constant columns map to pi/2; values outside the training range are
    /// clipped into [0, pi].
    Eigen::MatrixXd transform(const Eigen::MatrixXd &X) const;

    Json to_json() const;
    static AngleScaler from_json(const Json &doc);
};

std::pair<Eigen::MatrixXd, AngleScaler> scale_to_angle_range(const Eigen::MatrixXd &X);

// ---------------------------------------------------------------------------
// Rebalancing and splitting

/// Grows every class below the majority count with synthetic samples
/// x_i + lambda * (x_nn - x_i), x_nn drawn from the k nearest same-class
/// neighbours. Originals come first, in order.
RowTypeDataset smote_oversample(const RowTypeDataset &ds, std::size_t k_neighbors, Rng &rng);
RowTypeDataset smote_oversample(const RowTypeDataset &ds, std::size_t k_neighbors,
                                std::uint64_t seed);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Minimum share of the validation and test splits.
inline constexpr double kMinHoldoutFraction = 0.05;

/// Largest-remainder split sizes for `n` rows.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3> &fractions);

/// Stratified by label; each split's per-class count is within one row of
/// its proportional share and the split totals follow split_sizes.
SplitIndices stratified_split(std::span<const std::size_t> labels,
                              std::span<const std::string> class_names,
                              const std::array<double, 3> &fractions, Rng &rng);

struct DatasetSplit {
    RowTypeDataset train;
    RowTypeDataset validation;
    RowTypeDataset test;
};

DatasetSplit split_train_val_test(const RowTypeDataset &ds, const std::array<double, 3> &fractions,
                                  Rng &rng);

} // namespace hyquc::rtdpa
