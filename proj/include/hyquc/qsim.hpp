/**
 * @file
 * Exact statevector simulation of the parameterized circuit used as the
 * first layer of the hybrid model: angle embedding, strongly entangling
 * layers and Pauli-Z readout.
 *
 * Amplitude ordering is big-endian: wire 0 is the most significant bit of
 * the amplitude index.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hyquc {
class Rng;
}

namespace hyquc::qsim {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 16;

enum class Axis { X, Y, Z };

Axis parse_axis(const std::string &text);
char axis_name(Axis axis);

struct CircuitSpec {
    std::size_t n_qubits = 1;
    std::size_t n_layers = 1;
    Axis embedding_axis = Axis::Y;
    /// CNOT target offset within the ring.
    std::size_t entangler_range = 1;

    void validate() const;
    bool operator==(const CircuitSpec &) const = default;
};

class StateVector {
public:
    /// |0...0> on n_qubits wires.
    explicit StateVector(std::size_t n_qubits);

    /// Adopts raw amplitudes; the length must be a power of two. No
    /// normalization is applied or checked.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t dimension() const noexcept { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
    std::span<Complex> mutable_amplitudes() noexcept { return amplitudes_; }
    const Complex &operator[](std::size_t k) const { return amplitudes_[k]; }

    double norm_squared() const noexcept;

private:
    StateVector() = default;

    std::size_t n_qubits_ = 0;
    std::vector<Complex> amplitudes_;
};

/// Rotation angles indexed [layer][wire][axis]; axis 0..2 are the
/// (alpha, beta, gamma) of Rot = RZ(alpha) RY(beta) RZ(gamma).
class QuantumLayerWeights {
public:
    QuantumLayerWeights() = default;
    QuantumLayerWeights(std::size_t n_layers, std::size_t n_qubits, double fill = 0.0);

    static QuantumLayerWeights random(std::size_t n_layers, std::size_t n_qubits, Rng &rng);

    std::size_t n_layers() const noexcept { return n_layers_; }
    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t size() const noexcept { return angles_.size(); }

    double &operator()(std::size_t layer, std::size_t wire, std::size_t axis) {
        return angles_[offset(layer, wire, axis)];
    }
    double operator()(std::size_t layer, std::size_t wire, std::size_t axis) const {
        return angles_[offset(layer, wire, axis)];
    }
    double &at(std::size_t layer, std::size_t wire, std::size_t axis);
    double at(std::size_t layer, std::size_t wire, std::size_t axis) const;

    std::span<double> flat() noexcept { return angles_; }
    std::span<const double> flat() const noexcept { return angles_; }

    /// Throws ShapeError unless the tensor is n_layers x n_qubits x 3 for
    /// the given spec, and ArgumentError on non-finite entries.
    void validate(const CircuitSpec &spec) const;

    static std::size_t offset(std::size_t layer, std::size_t wire, std::size_t axis,
                              std::size_t n_qubits) noexcept {
        return (layer * n_qubits + wire) * 3 + axis;
    }

    bool operator==(const QuantumLayerWeights &) const = default;

private:
    std::size_t offset(std::size_t layer, std::size_t wire, std::size_t axis) const noexcept {
        return offset(layer, wire, axis, n_qubits_);
    }

    std::size_t n_layers_ = 0;
    std::size_t n_qubits_ = 0;
    std::vector<double> angles_;
};

StateVector init_zero_state(std::size_t n_qubits);

/// In-place kernel behind apply_single_qubit_rotation. Works on any
/// amplitude buffer of length 2^n_qubits, normalized or not.
void rotate_amplitudes(std::span<Complex> amplitudes, std::size_t n_qubits, std::size_t wire,
                       Axis axis, double theta);

StateVector apply_single_qubit_rotation(StateVector state, std::size_t wire, Axis axis,
                                        double theta);

StateVector apply_cnot(StateVector state, std::size_t control, std::size_t target);

StateVector angle_embed(std::span<const double> features, const CircuitSpec &spec);

StateVector apply_entangling_layers(StateVector state, const QuantumLayerWeights &weights,
                                    const CircuitSpec &spec);

double expval_z(const StateVector &state, std::size_t wire);

/// [<Z_0>, ..., <Z_{n-1}>] of the embedded and entangled state.
std::vector<double> quantum_layer_forward(std::span<const double> features,
                                          const QuantumLayerWeights &weights,
                                          const CircuitSpec &spec);

/// Readout of every wire from one state.
std::vector<double> expval_z_all(const StateVector &state);

/// Scales a real vector to unit Euclidean norm, as when raw values are
/// loaded directly as amplitudes.
std::vector<double> l2_normalize(std::span<const double> values);

} // namespace hyquc::qsim
