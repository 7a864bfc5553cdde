#include "hyquc/nn.hpp"

#include <algorithm>
#include <cmath>

#include "hyquc/error.hpp"
#include "hyquc/random.hpp"

namespace hyquc::nn {

namespace {

void check_eta(double eta) {
    if (!(eta > 0.0) && eta != 0.0)
        throw ArgumentError("learning rate must be non-negative");
}

double clip_prob(double p) { return std::clamp(p, kProbClip, 1.0 - kProbClip); }

} // namespace

Activation parse_activation(const std::string &name) {
    if (name == "sigmoid")
        return Activation::Sigmoid;
    if (name == "relu")
        return Activation::Relu;
    if (name == "softmax")
        return Activation::Softmax;
    if (name == "identity" || name == "linear")
        return Activation::Identity;
    throw ArgumentError("unknown activation '" + name + "'");
}

std::string activation_name(Activation activation) {
    switch (activation) {
    case Activation::Sigmoid:
        return "sigmoid";
    case Activation::Relu:
        return "relu";
    case Activation::Softmax:
        return "softmax";
    case Activation::Identity:
        return "identity";
    }
    return "identity";
}

DenseLayer DenseLayer::random(std::size_t in_dim, std::size_t out_dim, Activation activation,
                              Rng &rng) {
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim));
    layer.bias.resize(static_cast<Eigen::Index>(out_dim));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
            layer.weights(r, c) = rng.uniform(-0.5, 0.5);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
        layer.bias(r) = rng.uniform(-0.5, 0.5);
    layer.activation = activation;
    return layer;
}

void DenseLayer::validate() const {
    if (weights.rows() == 0 || weights.cols() == 0)
        throw ShapeError("dense layer has an empty weight matrix");
    if (bias.size() != weights.rows())
        throw ShapeError("bias length " + std::to_string(bias.size()) +
                         " does not match output dimension " + std::to_string(weights.rows()));
    if (!weights.allFinite() || !bias.allFinite())
        throw ArgumentError("dense layer has non-finite parameters");
}

std::size_t MLPHead::in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }

std::size_t MLPHead::out_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

void MLPHead::validate() const {
    if (layers.empty())
        throw ShapeError("head has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].validate();
        if (i > 0 && layers[i].in_dim() != layers[i - 1].out_dim())
            throw ShapeError("layer " + std::to_string(i) + " expects " +
                             std::to_string(layers[i].in_dim()) + " inputs but layer " +
                             std::to_string(i - 1) + " produces " +
                             std::to_string(layers[i - 1].out_dim()));
    }
    if (layers.back().activation != Activation::Softmax)
        throw ArgumentError("the output layer of a head must use softmax");
}

double sigmoid(double x) {
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Vector softmax(const Vector &logits) {
    if (logits.size() == 0)
        throw ShapeError("softmax of an empty vector");
    const double top = logits.maxCoeff();
    Vector out = (logits.array() - top).exp().matrix();
    out /= out.sum();
    return out;
}

Vector activate(Activation activation, const Vector &pre) {
    switch (activation) {
    case Activation::Sigmoid:
        return pre.unaryExpr([](double v) { return sigmoid(v); });
    case Activation::Relu:
        return pre.cwiseMax(0.0);
    case Activation::Softmax:
        return softmax(pre);
    case Activation::Identity:
        return pre;
    }
    return pre;
}

Vector dense_forward(const DenseLayer &layer, const Vector &x) {
    if (static_cast<std::size_t>(x.size()) != layer.in_dim())
        throw ShapeError("dense layer expects " + std::to_string(layer.in_dim()) +
                         " inputs, got " + std::to_string(x.size()));
    return activate(layer.activation, layer.weights * x + layer.bias);
}

std::vector<Vector> head_forward(const MLPHead &head, const Vector &x) {
    std::vector<Vector> outputs;
    outputs.reserve(head.layers.size() + 1);
    outputs.push_back(x);
    for (const auto &layer : head.layers)
        outputs.push_back(dense_forward(layer, outputs.back()));
    return outputs;
}

double bce_loss(int y, double y_hat) {
    const double p = clip_prob(y_hat);
    return -(y * std::log(p) + (1 - y) * std::log(1.0 - p));
}

double cross_entropy_loss(std::size_t y, const Vector &probs) {
    if (y >= static_cast<std::size_t>(probs.size()))
        throw IndexError("class index " + std::to_string(y) + " out of range for " +
                         std::to_string(probs.size()) + " classes");
    const double p = probs(static_cast<Eigen::Index>(y));
    // A confident correct prediction costs exactly nothing.
    if (p >= 1.0 - kProbClip)
        return 0.0;
    return -std::log(clip_prob(p));
}

DenseGrads dense_backward(const DenseLayer &layer, const Vector &x, const Vector &upstream) {
    if (static_cast<std::size_t>(x.size()) != layer.in_dim())
        throw ShapeError("dense_backward input has length " + std::to_string(x.size()) +
                         ", layer expects " + std::to_string(layer.in_dim()));
    if (static_cast<std::size_t>(upstream.size()) != layer.out_dim())
        throw ShapeError("dense_backward upstream gradient has length " +
                         std::to_string(upstream.size()) + ", layer produces " +
                         std::to_string(layer.out_dim()));
    const Vector pre = layer.weights * x + layer.bias;
    const Vector out = activate(layer.activation, pre);
    Vector delta; // dLoss / d(pre-activation)
    switch (layer.activation) {
    case Activation::Sigmoid:
        delta = upstream.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix()));
        break;
    case Activation::Relu:
        delta = upstream.cwiseProduct(
            pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
        break;
    case Activation::Softmax:
        delta = out.cwiseProduct((upstream.array() - out.dot(upstream)).matrix());
        break;
    case Activation::Identity:
        delta = upstream;
        break;
    }
    DenseGrads grads;
    grads.weights = delta * x.transpose();
    grads.bias = delta;
    grads.input = layer.weights.transpose() * delta;
    return grads;
}

Matrix sgd_update(const Matrix &params, const Matrix &grads, double eta) {
    check_eta(eta);
    if (params.rows() != grads.rows() || params.cols() != grads.cols())
        throw ShapeError("parameter and gradient shapes differ");
    return params - eta * grads;
}

Vector sgd_update(const Vector &params, const Vector &grads, double eta) {
    check_eta(eta);
    if (params.size() != grads.size())
        throw ShapeError("parameter and gradient lengths differ");
    return params - eta * grads;
}

std::vector<double> sgd_update(const std::vector<double> &params, const std::vector<double> &grads,
                               double eta) {
    check_eta(eta);
    if (params.size() != grads.size())
        throw ShapeError("parameter and gradient lengths differ");
    std::vector<double> out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
        out[i] = params[i] - eta * grads[i];
    return out;
}

} // namespace hyquc::nn
