#include "hyquc/qgrad.hpp"

#include <numbers>
#include <string>

#include "hyquc/error.hpp"

namespace hyquc::qgrad {

namespace {

constexpr double kShift = std::numbers::pi / 2.0;

void check_bounds(const qsim::QuantumLayerWeights &weights, const qsim::CircuitSpec &spec,
                  ParameterIndex p, std::size_t output_wire) {
    weights.validate(spec);
    if (p.layer >= spec.n_layers || p.wire >= spec.n_qubits || p.axis >= 3)
        throw IndexError("parameter index (" + std::to_string(p.layer) + ", " +
                         std::to_string(p.wire) + ", " + std::to_string(p.axis) +
                         ") out of range");
    if (output_wire >= spec.n_qubits)
        throw IndexError("output wire " + std::to_string(output_wire) + " out of range");
}

double shifted_output(std::span<const double> features, qsim::QuantumLayerWeights weights,
                      const qsim::CircuitSpec &spec, ParameterIndex p, std::size_t output_wire,
                      double delta) {
    weights(p.layer, p.wire, p.axis) += delta;
    return qsim::quantum_layer_forward(features, weights, spec)[output_wire];
}

} // namespace

double param_shift_grad(std::span<const double> features, const qsim::QuantumLayerWeights &weights,
                        const qsim::CircuitSpec &spec, ParameterIndex p, std::size_t output_wire) {
    check_bounds(weights, spec, p, output_wire);
    const double plus = shifted_output(features, weights, spec, p, output_wire, kShift);
    const double minus = shifted_output(features, weights, spec, p, output_wire, -kShift);
    return (plus - minus) / 2.0;
}

QuantumJacobian quantum_jacobian(std::span<const double> features,
                                 const qsim::QuantumLayerWeights &weights,
                                 const qsim::CircuitSpec &spec) {
    weights.validate(spec);
    const qsim::StateVector embedded = qsim::angle_embed(features, spec);
    QuantumJacobian jac(spec.n_qubits, spec.n_layers, spec.n_qubits);
    qsim::QuantumLayerWeights shifted = weights;
    auto angles = shifted.flat();
    for (std::size_t k = 0; k < angles.size(); ++k) {
        const double original = angles[k];
        angles[k] = original + kShift;
        const auto plus = qsim::expval_z_all(qsim::apply_entangling_layers(embedded, shifted, spec));
        angles[k] = original - kShift;
        const auto minus =
            qsim::expval_z_all(qsim::apply_entangling_layers(embedded, shifted, spec));
        angles[k] = original;
        for (std::size_t o = 0; o < spec.n_qubits; ++o)
            jac.row(o)[k] = (plus[o] - minus[o]) / 2.0;
    }
    return jac;
}

double finite_diff_oracle(std::span<const double> features,
                          const qsim::QuantumLayerWeights &weights, const qsim::CircuitSpec &spec,
                          ParameterIndex p, std::size_t output_wire, double h) {
    if (!(h > 0.0 && h <= 1e-2))
        throw ArgumentError("finite-difference step must lie in (0, 1e-2]");
    check_bounds(weights, spec, p, output_wire);
    const double plus = shifted_output(features, weights, spec, p, output_wire, h);
    const double minus = shifted_output(features, weights, spec, p, output_wire, -h);
    return (plus - minus) / (2.0 * h);
}

} // namespace hyquc::qgrad
