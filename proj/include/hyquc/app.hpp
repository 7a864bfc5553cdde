/**
 * @file
 * Command implementations behind the `hyquc` executable.
 *
 * Run configuration is a flat `key = value` file. Keys before the first
 * `[section]` are global; a `[row_type]` section overrides any of them for
 * that row type. Relative paths resolve against the config file's folder.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyquc/hybrid.hpp"
#include "hyquc/metrics.hpp"
#include "hyquc/pipeline.hpp"

namespace hyquc::app {

namespace fs = std::filesystem;

/// Exit status for predict runs where some rows could not be routed.
inline constexpr int kExitPartial = 3;

/// Settings resolved for one row type (section keys over global keys).
struct RowTypeSettings {
    pipeline::PreprocessConfig preprocess;
    qsim::CircuitSpec circuit;
    hybrid::HeadConfig head;
    hybrid::TrainConfig train;
    hybrid::HyperGrid grid;
    std::size_t cv_folds = 3;
};

class RunConfig {
public:
    static RunConfig parse(std::istream &in, const fs::path &base_dir = {});
    static RunConfig read(const fs::path &path);

    fs::path data;
    fs::path row_type_map;
    fs::path out_dir = "hyquc-out";
    std::string label_column = "IRAC";
    std::string row_type_column;
    std::string id_column;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    /// Throws ArgumentError on malformed values.
    RowTypeSettings settings_for(const std::string &row_type) const;

    void set(const std::string &key, const std::string &value);
    bool has_grid() const;

private:
    std::map<std::string, std::string> global_;
    std::map<std::string, std::map<std::string, std::string>> sections_;
    fs::path base_dir_;
};

struct RowTypeOutcome {
    std::string row_type;
    hybrid::TrainHistory history;
    metrics::MetricsReport test_report;
    double validation_accuracy = 0.0;
    fs::path model_path;
    fs::path loss_path;
};

struct TrainSummary {
    std::vector<RowTypeOutcome> row_types;
};

TrainSummary cmd_train(const RunConfig &config, std::ostream &log);

struct GridSearchSummary {
    std::map<std::string, hybrid::GridSearchResult> row_types;
};

GridSearchSummary cmd_gridsearch(const RunConfig &config, std::ostream &log);

/// Scores a saved model on labelled rows. Rows of other row types are
/// skipped when the table carries the row-type column.
metrics::MetricsReport cmd_evaluate(const fs::path &model_path, const fs::path &data_path,
                                    const std::optional<fs::path> &report_path, std::ostream &log);

struct PredictSummary {
    std::size_t rows = 0;
    std::size_t flagged = 0;
};

/// `models` may list model files or directories holding `*.model.json`.
/// Rows whose row type has no model are flagged, not fatal.
PredictSummary cmd_predict(const std::vector<fs::path> &models, const fs::path &input_path,
                           const fs::path &output_path, const RunConfig *config, std::ostream &log);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const fs::path &path, const std::string &contents);

std::string loss_history_csv(const hybrid::TrainHistory &history);
std::string leaderboard_csv(const hybrid::GridSearchResult &result);

} // namespace hyquc::app
