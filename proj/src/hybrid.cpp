#include "hyquc/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hyquc/error.hpp"
#include "hyquc/metrics.hpp"
#include "hyquc/qgrad.hpp"
#include "hyquc/random.hpp"

namespace hyquc::hybrid {

namespace {

std::span<const double> row_span(const Eigen::MatrixXd &m, Eigen::Index r, std::vector<double> &buf) {
    buf.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        buf[static_cast<std::size_t>(c)] = m(r, c);
    return buf;
}

std::size_t argmax(const nn::Vector &v) {
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(static_cast<Eigen::Index>(best)))
            best = static_cast<std::size_t>(i);
    return best;
}

void check_batch(const HybridModel &model, const Eigen::MatrixXd &inputs,
                 std::span<const std::size_t> labels) {
    if (labels.empty() || inputs.rows() == 0)
        throw ArgumentError("empty batch");
    if (static_cast<std::size_t>(inputs.rows()) != labels.size())
        throw ShapeError("batch has " + std::to_string(inputs.rows()) + " rows but " +
                         std::to_string(labels.size()) + " labels");
    if (static_cast<std::size_t>(inputs.cols()) != model.spec.n_qubits)
        throw ShapeError("batch has " + std::to_string(inputs.cols()) + " features, model has " +
                         std::to_string(model.spec.n_qubits) + " qubits");
    for (std::size_t y : labels)
        if (y >= model.n_classes)
            throw IndexError("label " + std::to_string(y) + " out of range");
}

Json matrix_json(const nn::Matrix &m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

nn::Matrix matrix_from_json(const Json &rows) {
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = n_rows ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    nn::Matrix m(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != n_cols)
            throw FormatError("ragged matrix in model document");
        for (Eigen::Index c = 0; c < n_cols; ++c)
            m(r, c) = rows[r][c].get<double>();
    }
    return m;
}

} // namespace

// --- model -------------------------------------------------------------------

HybridModel HybridModel::create(const qsim::CircuitSpec &spec, std::size_t n_classes,
                                const HeadConfig &head, Rng &rng, std::string row_type) {
    spec.validate();
    if (n_classes < 2)
        throw ArgumentError("a classifier needs at least 2 classes");
    HybridModel model;
    model.spec = spec;
    model.n_classes = n_classes;
    model.row_type = std::move(row_type);
    model.qweights = qsim::QuantumLayerWeights::random(spec.n_layers, spec.n_qubits, rng);
    std::size_t width = spec.n_qubits;
    for (std::size_t h : head.hidden) {
        if (h == 0)
            throw ArgumentError("hidden layer width must be positive");
        model.head.layers.push_back(nn::DenseLayer::random(width, h, head.hidden_activation, rng));
        width = h;
    }
    model.head.layers.push_back(
        nn::DenseLayer::random(width, n_classes, nn::Activation::Softmax, rng));
    return model;
}

void HybridModel::validate() const {
    spec.validate();
    qweights.validate(spec);
    head.validate();
    if (head.in_dim() != spec.n_qubits)
        throw ShapeError("head expects " + std::to_string(head.in_dim()) + " inputs, circuit has " +
                         std::to_string(spec.n_qubits) + " qubits");
    if (head.out_dim() != n_classes)
        throw ShapeError("head produces " + std::to_string(head.out_dim()) + " outputs for " +
                         std::to_string(n_classes) + " classes");
}

Json HybridModel::to_json() const {
    Json doc;
    doc["row_type"] = row_type;
    doc["n_classes"] = n_classes;
    doc["circuit"] = {{"n_qubits", spec.n_qubits},
                      {"n_layers", spec.n_layers},
                      {"embedding_axis", std::string(1, qsim::axis_name(spec.embedding_axis))},
                      {"entangler_range", spec.entangler_range}};
    Json q = Json::array();
    for (std::size_t l = 0; l < qweights.n_layers(); ++l) {
        Json layer = Json::array();
        for (std::size_t w = 0; w < qweights.n_qubits(); ++w)
            layer.push_back({qweights(l, w, 0), qweights(l, w, 1), qweights(l, w, 2)});
        q.push_back(layer);
    }
    doc["qweights"] = q;
    Json layers = Json::array();
    for (const auto &layer : head.layers) {
        std::vector<double> bias(layer.bias.data(), layer.bias.data() + layer.bias.size());
        layers.push_back({{"activation", nn::activation_name(layer.activation)},
                          {"weights", matrix_json(layer.weights)},
                          {"bias", bias}});
    }
    doc["head"] = layers;
    return doc;
}

HybridModel HybridModel::from_json(const Json &doc) {
    try {
        HybridModel model;
        model.row_type = doc.at("row_type").get<std::string>();
        model.n_classes = doc.at("n_classes").get<std::size_t>();
        const auto &c = doc.at("circuit");
        model.spec.n_qubits = c.at("n_qubits").get<std::size_t>();
        model.spec.n_layers = c.at("n_layers").get<std::size_t>();
        model.spec.embedding_axis = qsim::parse_axis(c.at("embedding_axis").get<std::string>());
        model.spec.entangler_range = c.at("entangler_range").get<std::size_t>();
        const auto &q = doc.at("qweights");
        model.qweights = qsim::QuantumLayerWeights(q.size(), q.empty() ? 0 : q[0].size());
        for (std::size_t l = 0; l < q.size(); ++l) {
            if (q[l].size() != model.qweights.n_qubits())
                throw FormatError("ragged quantum weight tensor");
            for (std::size_t w = 0; w < q[l].size(); ++w) {
                if (q[l][w].size() != 3)
                    throw FormatError("each wire needs exactly 3 rotation angles");
                for (std::size_t a = 0; a < 3; ++a)
                    model.qweights(l, w, a) = q[l][w][a].get<double>();
            }
        }
        for (const auto &j : doc.at("head")) {
            nn::DenseLayer layer;
            layer.activation = nn::parse_activation(j.at("activation").get<std::string>());
            layer.weights = matrix_from_json(j.at("weights"));
            const auto bias = j.at("bias").get<std::vector<double>>();
            layer.bias = Eigen::Map<const nn::Vector>(bias.data(), static_cast<Eigen::Index>(bias.size()));
            model.head.layers.push_back(std::move(layer));
        }
        model.validate();
        return model;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(std::string("malformed model document: ") + e.what());
    }
}

void TrainConfig::validate() const {
    if (epochs < 1)
        throw ArgumentError("epochs must be at least 1");
    if (batch_size < 1)
        throw ArgumentError("batch_size must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ArgumentError("learning_rate must be a finite non-negative number");
}

// --- gradients ---------------------------------------------------------------

ModelGrads ModelGrads::zeros_like(const HybridModel &model) {
    ModelGrads g;
    g.quantum.assign(model.qweights.size(), 0.0);
    for (const auto &layer : model.head.layers) {
        g.head_weights.push_back(nn::Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
        g.head_bias.push_back(nn::Vector::Zero(layer.bias.size()));
    }
    return g;
}

void ModelGrads::add_scaled(const ModelGrads &other, double scale) {
    for (std::size_t i = 0; i < quantum.size(); ++i)
        quantum[i] += scale * other.quantum[i];
    for (std::size_t l = 0; l < head_weights.size(); ++l) {
        head_weights[l] += scale * other.head_weights[l];
        head_bias[l] += scale * other.head_bias[l];
    }
}

double ModelGrads::max_abs() const {
    double m = 0.0;
    for (double g : quantum)
        m = std::max(m, std::abs(g));
    for (std::size_t l = 0; l < head_weights.size(); ++l) {
        if (head_weights[l].size())
            m = std::max(m, head_weights[l].cwiseAbs().maxCoeff());
        if (head_bias[l].size())
            m = std::max(m, head_bias[l].cwiseAbs().maxCoeff());
    }
    return m;
}

nn::Vector hybrid_forward(const HybridModel &model, std::span<const double> x) {
    if (x.size() != model.spec.n_qubits)
        throw ShapeError("input has " + std::to_string(x.size()) + " features, model has " +
                         std::to_string(model.spec.n_qubits) + " qubits");
    const auto readout = qsim::quantum_layer_forward(x, model.qweights, model.spec);
    const nn::Vector q = Eigen::Map<const nn::Vector>(readout.data(),
                                                      static_cast<Eigen::Index>(readout.size()));
    return nn::head_forward(model.head, q).back();
}

LossAndGrads loss_and_grads(const HybridModel &model, const Eigen::MatrixXd &inputs,
                            std::span<const std::size_t> labels) {
    check_batch(model, inputs, labels);
    LossAndGrads out;
    out.grads = ModelGrads::zeros_like(model);
    const double scale = 1.0 / static_cast<double>(labels.size());
    std::vector<double> x;
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        const auto features = row_span(inputs, r, x);
        const std::size_t y = labels[static_cast<std::size_t>(r)];
        const auto readout = qsim::quantum_layer_forward(features, model.qweights, model.spec);
        const nn::Vector q = Eigen::Map<const nn::Vector>(readout.data(),
                                                          static_cast<Eigen::Index>(readout.size()));
        const auto acts = nn::head_forward(model.head, q);
        const nn::Vector &probs = acts.back();
        out.loss += scale * nn::cross_entropy_loss(y, probs);

        nn::Vector upstream = nn::Vector::Zero(probs.size());
        const double py = probs(static_cast<Eigen::Index>(y));
        if (py > nn::kProbClip && py < 1.0 - nn::kProbClip)
            upstream(static_cast<Eigen::Index>(y)) = -1.0 / py;
        for (std::size_t l = model.head.layers.size(); l-- > 0;) {
            const auto g = nn::dense_backward(model.head.layers[l], acts[l], upstream);
            out.grads.head_weights[l] += scale * g.weights;
            out.grads.head_bias[l] += scale * g.bias;
            upstream = g.input;
        }
        // upstream now holds dLoss/d<Z_o>; chain through the circuit.
        const auto jac = qgrad::quantum_jacobian(features, model.qweights, model.spec);
        for (std::size_t o = 0; o < model.spec.n_qubits; ++o) {
            const double g = scale * upstream(static_cast<Eigen::Index>(o));
            if (g == 0.0)
                continue;
            const auto row = jac.row(o);
            for (std::size_t k = 0; k < row.size(); ++k)
                out.grads.quantum[k] += g * row[k];
        }
    }
    return out;
}

Evaluation evaluate(const HybridModel &model, const Eigen::MatrixXd &inputs,
                    std::span<const std::size_t> labels) {
    check_batch(model, inputs, labels);
    Evaluation e;
    std::vector<double> x;
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        const std::size_t y = labels[static_cast<std::size_t>(r)];
        const nn::Vector probs = hybrid_forward(model, row_span(inputs, r, x));
        e.loss += nn::cross_entropy_loss(y, probs);
        if (argmax(probs) == y)
            e.accuracy += 1.0;
    }
    e.loss /= static_cast<double>(labels.size());
    e.accuracy /= static_cast<double>(labels.size());
    return e;
}

void apply_sgd(HybridModel &model, const ModelGrads &grads, double learning_rate) {
    const auto angles = model.qweights.flat();
    const std::vector<double> current(angles.begin(), angles.end());
    const auto updated = nn::sgd_update(current, grads.quantum, learning_rate);
    std::copy(updated.begin(), updated.end(), angles.begin());
    for (std::size_t l = 0; l < model.head.layers.size(); ++l) {
        auto &layer = model.head.layers[l];
        layer.weights = nn::sgd_update(layer.weights, grads.head_weights[l], learning_rate);
        layer.bias = nn::sgd_update(layer.bias, grads.head_bias[l], learning_rate);
    }
}

// --- training ----------------------------------------------------------------

EpochStats train_epoch(HybridModel &model, const Eigen::MatrixXd &inputs,
                       std::span<const std::size_t> labels, const TrainConfig &config, Rng &rng) {
    config.validate();
    check_batch(model, inputs, labels);
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    EpochStats stats;
    std::vector<double> x;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        Eigen::MatrixXd batch(static_cast<Eigen::Index>(end - start), inputs.cols());
        std::vector<std::size_t> batch_labels;
        for (std::size_t i = start; i < end; ++i) {
            batch.row(static_cast<Eigen::Index>(i - start)) =
                inputs.row(static_cast<Eigen::Index>(order[i]));
            batch_labels.push_back(labels[order[i]]);
        }
        const auto lg = loss_and_grads(model, batch, batch_labels);
        stats.loss += lg.loss * static_cast<double>(end - start);
        for (std::size_t i = 0; i < batch_labels.size(); ++i)
            if (predict(model, row_span(batch, static_cast<Eigen::Index>(i), x)).label ==
                batch_labels[i])
                stats.accuracy += 1.0;
        if (config.learning_rate > 0.0)
            apply_sgd(model, lg.grads, config.learning_rate);
    }
    stats.loss /= static_cast<double>(order.size());
    stats.accuracy /= static_cast<double>(order.size());
    return stats;
}

FitResult fit(HybridModel model, const rtdpa::RowTypeDataset &train,
              const rtdpa::RowTypeDataset &validation, const TrainConfig &config, Rng &rng) {
    config.validate();
    model.validate();
    if (validation.n_rows() == 0)
        throw ArgumentError("fit needs a non-empty validation set");
    FitResult result{std::move(model), {}};
    result.history.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto stats = train_epoch(result.model, train.X, train.y, config, rng);
        const auto val = evaluate(result.model, validation.X, validation.y);
        result.history.push_back({stats.loss, stats.accuracy, val.loss, val.accuracy});
    }
    return result;
}

Prediction predict(const HybridModel &model, std::span<const double> x) {
    const nn::Vector probs = hybrid_forward(model, x);
    return {argmax(probs), std::vector<double>(probs.data(), probs.data() + probs.size())};
}

// --- cross-validation and grid search ----------------------------------------

std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed,
                              std::span<const std::size_t> labels) {
    if (k < 2 || k > n)
        throw ArgumentError("need 2 <= k <= n for k-fold (k=" + std::to_string(k) +
                            ", n=" + std::to_string(n) + ")");
    if (!labels.empty() && labels.size() != n)
        throw ShapeError("label count does not match n");
    Rng rng(seed);
    std::vector<std::size_t> fold_of(n);
    if (labels.empty()) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        const std::size_t base = n / k, extra = n % k;
        std::size_t pos = 0;
        for (std::size_t f = 0; f < k; ++f)
            for (std::size_t i = 0; i < base + (f < extra ? 1 : 0); ++i)
                fold_of[order[pos++]] = f;
    } else {
        const std::size_t n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
        std::vector<std::vector<std::size_t>> members(n_classes);
        for (std::size_t i = 0; i < n; ++i)
            members[labels[i]].push_back(i);
        std::size_t next = 0;
        for (auto &rows : members) {
            rng.shuffle(rows);
            for (std::size_t i : rows) {
                fold_of[i] = next;
                next = (next + 1) % k;
            }
        }
    }
    std::vector<Fold> folds(k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < k; ++f)
            (fold_of[i] == f ? folds[f].validation : folds[f].train).push_back(i);
    return folds;
}

std::vector<GridPoint> HyperGrid::expand() const {
    std::vector<GridPoint> points;
    for (auto layers : n_layers)
        for (auto qubits : n_qubits)
            for (auto lr : learning_rates)
                for (auto batch : batch_sizes)
                    for (auto ep : epochs)
                        points.push_back({layers, qubits, lr, batch, ep});
    return points;
}

std::size_t HyperGrid::size() const {
    return n_layers.size() * n_qubits.size() * learning_rates.size() * batch_sizes.size() *
           epochs.size();
}

void HyperGrid::validate() const {
    if (size() == 0)
        throw ArgumentError("hyperparameter grid has an empty axis");
    for (auto p : expand()) {
        qsim::CircuitSpec{p.n_qubits, p.n_layers, qsim::Axis::Y, 1}.validate();
        TrainConfig{p.epochs, p.learning_rate, p.batch_size, 0}.validate();
    }
}

FoldData prepare_fold(const rtdpa::RowTypeDataset &encoded, const Fold &fold, std::size_t n_qubits,
                      std::size_t smote_k, Rng &rng) {
    FoldData out;
    out.train = encoded.select_rows(fold.train);
    out.validation = encoded.select_rows(fold.validation);
    const auto pca = rtdpa::pca_fit(out.train.X, n_qubits);
    const auto scaler = rtdpa::AngleScaler::fit(rtdpa::pca_transform(pca, out.train.X));
    out.train.X = scaler.transform(rtdpa::pca_transform(pca, out.train.X));
    out.validation.X = scaler.transform(rtdpa::pca_transform(pca, out.validation.X));
    out.train.feature_names.clear();
    out.validation.feature_names.clear();
    if (smote_k > 0)
        out.train = rtdpa::smote_oversample(out.train, smote_k, rng);
    return out;
}

GridSearchResult grid_search(const HyperGrid &grid, const rtdpa::RowTypeDataset &encoded,
                             const GridSearchOptions &options) {
    grid.validate();
    encoded.validate();
    const auto folds = kfold_split(encoded.n_rows(), options.folds, options.seed, encoded.y);
    const auto points = grid.expand();
    GridSearchResult result;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const GridPoint &p = points[i];
        LeaderboardEntry entry;
        entry.declaration_index = i;
        entry.point = p;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            // Seeds depend on the fold only, so identical configurations
            // produce identical scores.
            Rng rng(derive_seed(options.seed, "fold-" + std::to_string(f)));
            const auto data = prepare_fold(encoded, folds[f], p.n_qubits, options.smote_k, rng);
            const qsim::CircuitSpec spec{p.n_qubits, p.n_layers, options.embedding_axis,
                                         options.entangler_range};
            auto model = HybridModel::create(spec, encoded.n_classes(), options.head, rng,
                                             encoded.row_type);
            const TrainConfig config{p.epochs, p.learning_rate, p.batch_size, options.seed};
            const auto fitted = fit(std::move(model), data.train, data.validation, config, rng);
            std::vector<std::size_t> predicted;
            std::vector<double> x(p.n_qubits);
            for (Eigen::Index r = 0; r < data.validation.X.rows(); ++r) {
                for (std::size_t c = 0; c < p.n_qubits; ++c)
                    x[c] = data.validation.X(r, static_cast<Eigen::Index>(c));
                predicted.push_back(predict(fitted.model, x).label);
            }
            const auto cm = metrics::confusion_matrix(data.validation.y, predicted,
                                                      encoded.n_classes());
            std::vector<double> f1;
            std::vector<std::size_t> support;
            for (std::size_t c = 0; c < cm.n_classes(); ++c) {
                const auto s = metrics::per_class_prf(cm, c);
                f1.push_back(s.f1);
                support.push_back(s.support);
            }
            entry.fold_macro_f1.push_back(metrics::macro_weighted_avg(f1, support).macro);
            entry.fold_accuracy.push_back(metrics::accuracy(cm));
        }
        const double k = static_cast<double>(folds.size());
        entry.mean_macro_f1 =
            std::accumulate(entry.fold_macro_f1.begin(), entry.fold_macro_f1.end(), 0.0) / k;
        entry.mean_accuracy =
            std::accumulate(entry.fold_accuracy.begin(), entry.fold_accuracy.end(), 0.0) / k;
        result.leaderboard.push_back(std::move(entry));
    }
    std::stable_sort(result.leaderboard.begin(), result.leaderboard.end(),
                     [](const LeaderboardEntry &a, const LeaderboardEntry &b) {
                         if (a.mean_macro_f1 != b.mean_macro_f1)
                             return a.mean_macro_f1 > b.mean_macro_f1;
                         return a.mean_accuracy > b.mean_accuracy;
                     });
    result.best = result.leaderboard.front().point;
    return result;
}

} // namespace hyquc::hybrid
