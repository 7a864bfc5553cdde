#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hyquc/qsim.hpp"

namespace hyquc::qgrad {

struct ParameterIndex {
    std::size_t layer = 0;
    std::size_t wire = 0;
    std::size_t axis = 0;
};

/// d<Z_output> / d(angle) for every output wire and every rotation angle,
/// indexed [output_wire][layer][wire][axis].
class QuantumJacobian {
public:
    QuantumJacobian(std::size_t n_outputs, std::size_t n_layers, std::size_t n_qubits)
        : n_outputs_(n_outputs), n_layers_(n_layers), n_qubits_(n_qubits),
          entries_(n_outputs * n_layers * n_qubits * 3, 0.0) {}

    std::size_t n_outputs() const noexcept { return n_outputs_; }
    std::size_t n_layers() const noexcept { return n_layers_; }
    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t n_parameters() const noexcept { return n_layers_ * n_qubits_ * 3; }

    double &operator()(std::size_t output, std::size_t layer, std::size_t wire, std::size_t axis) {
        return entries_[output * n_parameters() +
                        qsim::QuantumLayerWeights::offset(layer, wire, axis, n_qubits_)];
    }
    double operator()(std::size_t output, std::size_t layer, std::size_t wire,
                      std::size_t axis) const {
        return entries_[output * n_parameters() +
                        qsim::QuantumLayerWeights::offset(layer, wire, axis, n_qubits_)];
    }

    /// Row of derivatives for one output, in QuantumLayerWeights::flat order.
    std::span<const double> row(std::size_t output) const {
        return std::span<const double>(entries_).subspan(output * n_parameters(), n_parameters());
    }
    std::span<double> row(std::size_t output) {
        return std::span<double>(entries_).subspan(output * n_parameters(), n_parameters());
    }

private:
    std::size_t n_outputs_;
    std::size_t n_layers_;
    std::size_t n_qubits_;
    std::vector<double> entries_;
};

/// Parameter-shift derivative: (f(theta + pi/2) - f(theta - pi/2)) / 2 where
/// f is <Z_output_wire> of the quantum layer. Exact for RX/RY/RZ gates.
double param_shift_grad(std::span<const double> features, const qsim::QuantumLayerWeights &weights,
                        const qsim::CircuitSpec &spec, ParameterIndex p, std::size_t output_wire);

/// All shift-rule derivatives from 2 * n_parameters circuit evaluations.
/// The embedding is computed once and shared by every shifted evaluation.
QuantumJacobian quantum_jacobian(std::span<const double> features,
                                 const qsim::QuantumLayerWeights &weights,
                                 const qsim::CircuitSpec &spec);

/// Central difference (f(theta + h) - f(theta - h)) / 2h; test oracle.
double finite_diff_oracle(std::span<const double> features,
                          const qsim::QuantumLayerWeights &weights, const qsim::CircuitSpec &spec,
                          ParameterIndex p, std::size_t output_wire, double h);

} // namespace hyquc::qgrad
