#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "hyquc/error.hpp"
#include "hyquc/rtdpa.hpp"

namespace hyquc::rtdpa {

namespace {

Json vector_json(const Eigen::VectorXd &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const Json &j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace

PCAModel pca_fit(const Eigen::MatrixXd &X, std::size_t k) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto d = static_cast<std::size_t>(X.cols());
    if (n < 2)
        throw ArgumentError("PCA needs at least 2 rows");
    if (k < 1 || k > std::min(n - 1, d))
        throw ArgumentError("cannot keep " + std::to_string(k) + " components from " +
                            std::to_string(n) + " rows x " + std::to_string(d) + " features");
    PCAModel model;
    model.mean = X.colwise().mean().transpose();
    const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw ArgumentError("covariance eigendecomposition failed");
    // Eigenvalues come back ascending.
    const Eigen::VectorXd &values = solver.eigenvalues();
    const Eigen::MatrixXd &vectors = solver.eigenvectors();
    model.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    model.explained_variance.resize(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        const auto src = static_cast<Eigen::Index>(d - 1 - i);
        Eigen::VectorXd v = vectors.col(src);
        Eigen::Index pivot = 0;
        v.cwiseAbs().maxCoeff(&pivot);
        if (v(pivot) < 0.0)
            v = -v;
        model.components.row(static_cast<Eigen::Index>(i)) = v.transpose();
        model.explained_variance(static_cast<Eigen::Index>(i)) = std::max(values(src), 0.0);
    }
    return model;
}

PCAModel PCAModel::truncated(std::size_t k) const {
    if (k < 1 || k > n_components())
        throw ArgumentError("cannot truncate " + std::to_string(n_components()) +
                            " components to " + std::to_string(k));
    PCAModel out;
    out.mean = mean;
    out.components = components.topRows(static_cast<Eigen::Index>(k));
    out.explained_variance = explained_variance.head(static_cast<Eigen::Index>(k));
    return out;
}

Eigen::MatrixXd pca_transform(const PCAModel &model, const Eigen::MatrixXd &X) {
    if (static_cast<std::size_t>(X.cols()) != model.n_features())
        throw ShapeError("PCA model expects " + std::to_string(model.n_features()) +
                         " columns, got " + std::to_string(X.cols()));
    return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd pca_inverse_transform(const PCAModel &model, const Eigen::MatrixXd &Z) {
    if (static_cast<std::size_t>(Z.cols()) != model.n_components())
        throw ShapeError("PCA model has " + std::to_string(model.n_components()) +
                         " components, got " + std::to_string(Z.cols()));
    return (Z * model.components).rowwise() + model.mean.transpose();
}

std::size_t select_components(const PCAModel &model, std::size_t requested, std::size_t cap) {
    if (cap < 1)
        throw ArgumentError("component cap must be at least 1");
    return std::min({requested, cap, model.n_components()});
}

std::size_t scree_elbow(std::span<const double> eigenvalues) {
    const std::size_t n = eigenvalues.size();
    if (n == 0)
        throw ArgumentError("empty scree curve");
    if (n <= 2)
        return n;
    const double x0 = 0.0, y0 = eigenvalues.front();
    const double x1 = static_cast<double>(n - 1), y1 = eigenvalues.back();
    const double dx = x1 - x0, dy = y1 - y0;
    const double len = std::hypot(dx, dy);
    std::size_t best = 0;
    double best_dist = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dist =
            std::abs(dy * static_cast<double>(i) - dx * eigenvalues[i] + x1 * y0 - y1 * x0) / len;
        if (dist > best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    return best + 1;
}

Json PCAModel::to_json() const {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < components.rows(); ++r)
        rows.push_back(vector_json(components.row(r).transpose()));
    return {{"mean", vector_json(mean)},
            {"components", rows},
            {"explained_variance", vector_json(explained_variance)}};
}

PCAModel PCAModel::from_json(const Json &doc) {
    PCAModel model;
    model.mean = vector_from_json(doc.at("mean"));
    model.explained_variance = vector_from_json(doc.at("explained_variance"));
    const auto &rows = doc.at("components");
    model.components.resize(static_cast<Eigen::Index>(rows.size()), model.mean.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Eigen::VectorXd row = vector_from_json(rows[r]);
        if (row.size() != model.mean.size())
            throw FormatError("PCA component length does not match the mean");
        model.components.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return model;
}

AngleScaler AngleScaler::fit(const Eigen::MatrixXd &X) {
    if (X.rows() == 0)
        throw ArgumentError("cannot fit a scaler on zero rows");
    if (!X.allFinite())
        throw ArgumentError("cannot fit a scaler on non-finite data");
    return {X.colwise().minCoeff().transpose(), X.colwise().maxCoeff().transpose()};
}

Eigen::MatrixXd AngleScaler::transform(const Eigen::MatrixXd &X) const {
    if (X.cols() != min.size())
        throw ShapeError("scaler expects " + std::to_string(min.size()) + " columns, got " +
                         std::to_string(X.cols()));
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double span = max(c) - min(c);
        for (Eigen::Index r = 0; r < X.rows(); ++r) {
            if (span <= 0.0) {
                out(r, c) = std::numbers::pi / 2.0;
                continue;
            }
            const double t = (X(r, c) - min(c)) / span;
            out(r, c) = std::clamp(t, 0.0, 1.0) * std::numbers::pi;
        }
    }
    return out;
}

Json AngleScaler::to_json() const { return {{"min", vector_json(min)}, {"max", vector_json(max)}}; }

AngleScaler AngleScaler::from_json(const Json &doc) {
    return {vector_from_json(doc.at("min")), vector_from_json(doc.at("max"))};
}

std::pair<Eigen::MatrixXd, AngleScaler> scale_to_angle_range(const Eigen::MatrixXd &X) {
    AngleScaler scaler = AngleScaler::fit(X);
    Eigen::MatrixXd scaled = scaler.transform(X);
    return {std::move(scaled), std::move(scaler)};
}

} // namespace hyquc::rtdpa
