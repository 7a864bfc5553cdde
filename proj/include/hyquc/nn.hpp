/**
 * @file
 * Dense layers, activations, losses and plain SGD: the classical half of
 * the hybrid model.
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hyquc {
class Rng;
}

namespace hyquc::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Probabilities are clipped to [kProbClip, 1 - kProbClip] before taking logs;
/// cross-entropy is exactly 0 once the true class reaches 1 - kProbClip.
inline constexpr double kProbClip = 1e-12;

enum class Activation { Sigmoid, Relu, Softmax, Identity };

Activation parse_activation(const std::string &name);
std::string activation_name(Activation activation);

struct DenseLayer {
    Matrix weights; // out_dim x in_dim
    Vector bias;    // out_dim
    Activation activation = Activation::Identity;

    std::size_t in_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
    std::size_t out_dim() const noexcept { return static_cast<std::size_t>(weights.rows()); }

    /// Weights and bias drawn uniformly from [-0.5, 0.5].
    static DenseLayer random(std::size_t in_dim, std::size_t out_dim, Activation activation,
                             Rng &rng);

    void validate() const;
};

struct MLPHead {
    std::vector<DenseLayer> layers;

    std::size_t in_dim() const;
    std::size_t out_dim() const;

    /// Dimensions chain, entries finite, last activation is softmax.
    void validate() const;
};

double sigmoid(double x);

/// Max-subtracted softmax. Throws ShapeError on empty input.
Vector softmax(const Vector &logits);

Vector activate(Activation activation, const Vector &pre);

Vector dense_forward(const DenseLayer &layer, const Vector &x);

/// Output of every layer, front to back; element 0 is the input itself.
std::vector<Vector> head_forward(const MLPHead &head, const Vector &x);

double bce_loss(int y, double y_hat);

double cross_entropy_loss(std::size_t y, const Vector &probs);

struct DenseGrads {
    Matrix weights;
    Vector bias;
    Vector input;
};

/// Chain rule through one layer. `upstream` is dLoss/d(output) of the
/// layer's activation; the returned input gradient feeds the layer below.
DenseGrads dense_backward(const DenseLayer &layer, const Vector &x, const Vector &upstream);

Matrix sgd_update(const Matrix &params, const Matrix &grads, double eta);
Vector sgd_update(const Vector &params, const Vector &grads, double eta);
std::vector<double> sgd_update(const std::vector<double> &params, const std::vector<double> &grads,
                               double eta);

} // namespace hyquc::nn
