/**
 * @file
 * The per-row-type hybrid classifier: quantum layer -> dense head ->
 * softmax, trained with SGD where head gradients come from backpropagation
 * and circuit gradients from the parameter-shift rule.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyquc/nn.hpp"
#include "hyquc/qsim.hpp"
#include "hyquc/rtdpa.hpp"

namespace hyquc {
class Rng;
}

namespace hyquc::hybrid {

using Json = nlohmann::ordered_json;

/// Hidden layer widths between the quantum readout and the softmax output.
/// The default mirrors the two-hidden-layer head; an empty list gives a
/// single dense softmax over the readout.
struct HeadConfig {
    std::vector<std::size_t> hidden{8, 8};
    nn::Activation hidden_activation = nn::Activation::Sigmoid;

    static HeadConfig single_layer() { return {{}, nn::Activation::Sigmoid}; }
};

struct HybridModel {
    qsim::CircuitSpec spec;
    qsim::QuantumLayerWeights qweights;
    nn::MLPHead head;
    std::size_t n_classes = 0;
    std::string row_type;

    /// Angles uniform in [0, 2pi), dense parameters uniform in [-0.5, 0.5].
    static HybridModel create(const qsim::CircuitSpec &spec, std::size_t n_classes,
                              const HeadConfig &head, Rng &rng, std::string row_type = {});

    void validate() const;

    Json to_json() const;
    static HybridModel from_json(const Json &doc);
};

struct TrainConfig {
    std::size_t epochs = 50;
    double learning_rate = 0.01;
    std::size_t batch_size = 16;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct EpochRecord {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

/// Gradients shaped like the model: quantum entries follow
/// QuantumLayerWeights::flat order, head entries follow head.layers.
struct ModelGrads {
    std::vector<double> quantum;
    std::vector<nn::Matrix> head_weights;
    std::vector<nn::Vector> head_bias;

    static ModelGrads zeros_like(const HybridModel &model);
    void add_scaled(const ModelGrads &other, double scale);
    double max_abs() const;
};

struct LossAndGrads {
    double loss = 0.0;
    ModelGrads grads;
};

/// Class probabilities for one angle-scaled feature row.
nn::Vector hybrid_forward(const HybridModel &model, std::span<const double> x);

/// Mean cross-entropy over the batch and its gradient. Rows of `inputs`
/// are samples.
LossAndGrads loss_and_grads(const HybridModel &model, const Eigen::MatrixXd &inputs,
                            std::span<const std::size_t> labels);

/// Mean loss and accuracy without gradients.
struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
};
Evaluation evaluate(const HybridModel &model, const Eigen::MatrixXd &inputs,
                    std::span<const std::size_t> labels);

void apply_sgd(HybridModel &model, const ModelGrads &grads, double learning_rate);

struct EpochStats {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// One pass over seeded-shuffled mini-batches with an SGD step per batch.
/// Loss and accuracy are accumulated from each batch's forward pass.
EpochStats train_epoch(HybridModel &model, const Eigen::MatrixXd &inputs,
                       std::span<const std::size_t> labels, const TrainConfig &config, Rng &rng);

struct FitResult {
    HybridModel model;
    TrainHistory history;
};

FitResult fit(HybridModel model, const rtdpa::RowTypeDataset &train,
              const rtdpa::RowTypeDataset &validation, const TrainConfig &config, Rng &rng);

struct Prediction {
    std::size_t label = 0;
    std::vector<double> probabilities;
};

/// Argmax of hybrid_forward; ties resolve to the lowest class index.
Prediction predict(const HybridModel &model, std::span<const double> x);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

/// k folds partitioning 0..n-1. With labels, each class is dealt across
/// the folds in turn so every fold sees its share.
std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed,
                              std::span<const std::size_t> labels = {});

struct GridPoint {
    std::size_t n_layers = 1;
    std::size_t n_qubits = 2;
    double learning_rate = 0.01;
    std::size_t batch_size = 16;
    std::size_t epochs = 50;

    bool operator==(const GridPoint &) const = default;
};

struct HyperGrid {
    std::vector<std::size_t> n_layers{1, 2, 3};
    std::vector<std::size_t> n_qubits{2, 3, 4};
    std::vector<double> learning_rates{0.01, 0.001};
    std::vector<std::size_t> batch_sizes{16, 32};
    std::vector<std::size_t> epochs{50, 100};

    /// Cartesian product, n_layers outermost and epochs innermost; this is
    /// the declaration order used for tie-breaking.
    std::vector<GridPoint> expand() const;
    std::size_t size() const;
    void validate() const;
};

struct GridSearchOptions {
    std::size_t folds = 3;
    std::uint64_t seed = 0;
    HeadConfig head;
    qsim::Axis embedding_axis = qsim::Axis::Y;
    std::size_t entangler_range = 1;
    /// Rebalance each fold's training part; 0 disables SMOTE.
    std::size_t smote_k = 5;
};

struct LeaderboardEntry {
    std::size_t declaration_index = 0;
    GridPoint point;
    double mean_macro_f1 = 0.0;
    double mean_accuracy = 0.0;
    std::vector<double> fold_macro_f1;
    std::vector<double> fold_accuracy;
};

struct GridSearchResult {
    GridPoint best;
    /// Ranked: macro-F1 desc, then accuracy desc, then declaration order.
    std::vector<LeaderboardEntry> leaderboard;
};

/// Cross-validated search over `grid`. `encoded` holds imputed and encoded
/// (not yet projected) training rows; each fold fits its own PCA with
/// n_qubits components, angle scaling and SMOTE on the fold's training part.
GridSearchResult grid_search(const HyperGrid &grid, const rtdpa::RowTypeDataset &encoded,
                             const GridSearchOptions &options);

/// Projects, scales and rebalances one train/validation pair the way
/// grid_search does for each fold.
struct FoldData {
    rtdpa::RowTypeDataset train;
    rtdpa::RowTypeDataset validation;
};
FoldData prepare_fold(const rtdpa::RowTypeDataset &encoded, const Fold &fold, std::size_t n_qubits,
                      std::size_t smote_k, Rng &rng);

} // namespace hyquc::hybrid
