#include "hyquc/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "hyquc/error.hpp"
#include "hyquc/random.hpp"

namespace hyquc::qsim {

namespace {

std::size_t wire_mask(std::size_t n_qubits, std::size_t wire) {
    return std::size_t{1} << (n_qubits - 1 - wire);
}

void check_wire(std::size_t n_qubits, std::size_t wire, const char *what) {
    if (wire >= n_qubits)
        throw IndexError(std::string(what) + " " + std::to_string(wire) +
                         " out of range for " + std::to_string(n_qubits) + " qubits");
}

void check_qubit_count(std::size_t n_qubits) {
    if (n_qubits < 1)
        throw SizeError("a register needs at least 1 qubit");
    if (n_qubits > kMaxQubits)
        throw SizeError("requested " + std::to_string(n_qubits) +
                        " qubits exceeds the simulator cap of " + std::to_string(kMaxQubits));
}

void cnot_inplace(std::span<Complex> amps, std::size_t n_qubits, std::size_t control,
                  std::size_t target) {
    const std::size_t cmask = wire_mask(n_qubits, control);
    const std::size_t tmask = wire_mask(n_qubits, target);
    for (std::size_t k = 0; k < amps.size(); ++k)
        if ((k & cmask) && !(k & tmask))
            std::swap(amps[k], amps[k | tmask]);
}

} // namespace

Axis parse_axis(const std::string &text) {
    if (text == "X" || text == "x")
        return Axis::X;
    if (text == "Y" || text == "y")
        return Axis::Y;
    if (text == "Z" || text == "z")
        return Axis::Z;
    throw ArgumentError("unknown rotation axis '" + text + "'");
}

char axis_name(Axis axis) {
    switch (axis) {
    case Axis::X:
        return 'X';
    case Axis::Y:
        return 'Y';
    case Axis::Z:
        return 'Z';
    }
    return '?';
}

void CircuitSpec::validate() const {
    check_qubit_count(n_qubits);
    if (n_layers < 1)
        throw ArgumentError("n_layers must be at least 1");
    const std::size_t ring = std::max<std::size_t>(n_qubits, 2);
    if (entangler_range < 1 || entangler_range >= ring)
        throw ArgumentError("entangler_range " + std::to_string(entangler_range) +
                            " must lie in [1, " + std::to_string(ring - 1) + "]");
}

StateVector::StateVector(std::size_t n_qubits) {
    check_qubit_count(n_qubits);
    n_qubits_ = n_qubits;
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = Complex{1.0, 0.0};
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim < 2 || (dim & (dim - 1)) != 0)
        throw ShapeError("amplitude count " + std::to_string(dim) +
                         " is not a power of two >= 2");
    std::size_t n = 0;
    while ((std::size_t{1} << n) < dim)
        ++n;
    check_qubit_count(n);
    StateVector state;
    state.n_qubits_ = n;
    state.amplitudes_ = std::move(amplitudes);
    return state;
}

double StateVector::norm_squared() const noexcept {
    double total = 0.0;
    for (const auto &a : amplitudes_)
        total += std::norm(a);
    return total;
}

QuantumLayerWeights::QuantumLayerWeights(std::size_t n_layers, std::size_t n_qubits, double fill)
    : n_layers_(n_layers), n_qubits_(n_qubits), angles_(n_layers * n_qubits * 3, fill) {}

QuantumLayerWeights QuantumLayerWeights::random(std::size_t n_layers, std::size_t n_qubits,
                                                Rng &rng) {
    QuantumLayerWeights w(n_layers, n_qubits);
    for (double &angle : w.angles_)
        angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return w;
}

double &QuantumLayerWeights::at(std::size_t layer, std::size_t wire, std::size_t axis) {
    if (layer >= n_layers_ || wire >= n_qubits_ || axis >= 3)
        throw IndexError("weight index out of range");
    return (*this)(layer, wire, axis);
}

double QuantumLayerWeights::at(std::size_t layer, std::size_t wire, std::size_t axis) const {
    if (layer >= n_layers_ || wire >= n_qubits_ || axis >= 3)
        throw IndexError("weight index out of range");
    return (*this)(layer, wire, axis);
}

void QuantumLayerWeights::validate(const CircuitSpec &spec) const {
    if (n_layers_ != spec.n_layers || n_qubits_ != spec.n_qubits)
        throw ShapeError("weights are " + std::to_string(n_layers_) + "x" +
                         std::to_string(n_qubits_) + "x3, circuit expects " +
                         std::to_string(spec.n_layers) + "x" + std::to_string(spec.n_qubits) +
                         "x3");
    for (double a : angles_)
        if (!std::isfinite(a))
            throw ArgumentError("non-finite rotation angle");
}

StateVector init_zero_state(std::size_t n_qubits) { return StateVector(n_qubits); }

void rotate_amplitudes(std::span<Complex> amplitudes, std::size_t n_qubits, std::size_t wire,
                       Axis axis, double theta) {
    check_wire(n_qubits, wire, "wire");
    if (!std::isfinite(theta))
        throw ArgumentError("rotation angle must be finite");
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    Complex m00, m01, m10, m11;
    switch (axis) {
    case Axis::X:
        m00 = {c, 0.0};
        m01 = {0.0, -s};
        m10 = {0.0, -s};
        m11 = {c, 0.0};
        break;
    case Axis::Y:
        m00 = {c, 0.0};
        m01 = {-s, 0.0};
        m10 = {s, 0.0};
        m11 = {c, 0.0};
        break;
    case Axis::Z:
        m00 = {c, -s};
        m01 = {0.0, 0.0};
        m10 = {0.0, 0.0};
        m11 = {c, s};
        break;
    }
    const std::size_t mask = wire_mask(n_qubits, wire);
    const std::size_t dim = amplitudes.size();
    for (std::size_t k = 0; k < dim; ++k) {
        if (k & mask)
            continue;
        const Complex a0 = amplitudes[k];
        const Complex a1 = amplitudes[k | mask];
        amplitudes[k] = m00 * a0 + m01 * a1;
        amplitudes[k | mask] = m10 * a0 + m11 * a1;
    }
}

StateVector apply_single_qubit_rotation(StateVector state, std::size_t wire, Axis axis,
                                        double theta) {
    rotate_amplitudes(state.mutable_amplitudes(), state.n_qubits(), wire, axis, theta);
    return state;
}

StateVector apply_cnot(StateVector state, std::size_t control, std::size_t target) {
    const std::size_t n = state.n_qubits();
    check_wire(n, control, "control wire");
    check_wire(n, target, "target wire");
    if (control == target)
        throw ArgumentError("CNOT control and target must differ");
    cnot_inplace(state.mutable_amplitudes(), n, control, target);
    return state;
}

StateVector angle_embed(std::span<const double> features, const CircuitSpec &spec) {
    spec.validate();
    if (features.size() != spec.n_qubits)
        throw ShapeError("angle embedding got " + std::to_string(features.size()) +
                         " features for " + std::to_string(spec.n_qubits) + " qubits");
    StateVector state(spec.n_qubits);
    for (std::size_t w = 0; w < spec.n_qubits; ++w)
        rotate_amplitudes(state.mutable_amplitudes(), spec.n_qubits, w, spec.embedding_axis,
                          features[w]);
    return state;
}

StateVector apply_entangling_layers(StateVector state, const QuantumLayerWeights &weights,
                                    const CircuitSpec &spec) {
    spec.validate();
    weights.validate(spec);
    if (state.n_qubits() != spec.n_qubits)
        throw ShapeError("state has " + std::to_string(state.n_qubits()) +
                         " qubits, circuit expects " + std::to_string(spec.n_qubits));
    const std::size_t n = spec.n_qubits;
    auto amps = state.mutable_amplitudes();
    for (std::size_t l = 0; l < spec.n_layers; ++l) {
        for (std::size_t w = 0; w < n; ++w) {
            // RZ(alpha) RY(beta) RZ(gamma): gamma acts first.
            rotate_amplitudes(amps, n, w, Axis::Z, weights(l, w, 2));
            rotate_amplitudes(amps, n, w, Axis::Y, weights(l, w, 1));
            rotate_amplitudes(amps, n, w, Axis::Z, weights(l, w, 0));
        }
        if (n > 1)
            for (std::size_t w = 0; w < n; ++w)
                cnot_inplace(amps, n, w, (w + spec.entangler_range) % n);
    }
    return state;
}

double expval_z(const StateVector &state, std::size_t wire) {
    check_wire(state.n_qubits(), wire, "wire");
    const std::size_t mask = wire_mask(state.n_qubits(), wire);
    double total = 0.0;
    const auto amps = state.amplitudes();
    for (std::size_t k = 0; k < amps.size(); ++k)
        total += (k & mask) ? -std::norm(amps[k]) : std::norm(amps[k]);
    return total;
}

std::vector<double> expval_z_all(const StateVector &state) {
    std::vector<double> out(state.n_qubits());
    for (std::size_t w = 0; w < out.size(); ++w)
        out[w] = expval_z(state, w);
    return out;
}

std::vector<double> quantum_layer_forward(std::span<const double> features,
                                          const QuantumLayerWeights &weights,
                                          const CircuitSpec &spec) {
    return expval_z_all(apply_entangling_layers(angle_embed(features, spec), weights, spec));
}

std::vector<double> l2_normalize(std::span<const double> values) {
    double total = 0.0;
    for (double v : values)
        total += v * v;
    if (total <= 0.0)
        throw ArgumentError("cannot normalize a zero vector");
    const double norm = std::sqrt(total);
    std::vector<double> out(values.begin(), values.end());
    for (double &v : out)
        v /= norm;
    return out;
}

} // namespace hyquc::qsim
