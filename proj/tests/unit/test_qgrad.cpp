#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hyquc/error.hpp"
#include "hyquc/qgrad.hpp"
#include "hyquc/random.hpp"
#include "oracles.hpp"

using namespace hyquc;
using namespace hyquc::qgrad;
using qsim::CircuitSpec;
using qsim::QuantumLayerWeights;
using std::numbers::pi;

namespace {

// Central difference through the dense-matrix oracle, not the library.
double oracle_fd(std::span<const double> x, const QuantumLayerWeights &w, const CircuitSpec &s,
                 std::size_t k, std::size_t out, double h = 1e-5) {
    std::vector<double> a(w.flat().begin(), w.flat().end());
    a[k] += h;
    const double plus = oracle::circuit(x, a, s.n_qubits, s.n_layers, 'Y', s.entangler_range)[out];
    a[k] -= 2 * h;
    const double minus = oracle::circuit(x, a, s.n_qubits, s.n_layers, 'Y', s.entangler_range)[out];
    return (plus - minus) / (2 * h);
}

std::vector<double> random_features(Rng &rng, std::size_t n) {
    std::vector<double> x(n);
    for (auto &v : x)
        v = rng.uniform(0, pi);
    return x;
}

} // namespace

TEST_CASE("cos curve on one wire") {
    const CircuitSpec spec{1, 1};
    const std::vector<double> x{0.0};
    QuantumLayerWeights w(1, 1);
    const ParameterIndex beta{0, 0, 1};

    CHECK(std::abs(param_shift_grad(x, w, spec, beta, 0)) <= 1e-15);
    CHECK(std::abs(finite_diff_oracle(x, w, spec, beta, 0, 1e-5)) <= 1e-9);

    w(0, 0, 1) = pi / 2;
    CHECK(std::abs(param_shift_grad(x, w, spec, beta, 0) + 1.0) <= 1e-12);

    w(0, 0, 1) = 1.0;
    CHECK(std::abs(finite_diff_oracle(x, w, spec, beta, 0, 1e-5) + std::sin(1.0)) <= 1e-8);

    for (double b : {0.0, 0.4, 1.0, 2.2}) {
        w(0, 0, 1) = b;
        const auto jac = quantum_jacobian(x, w, spec);
        CHECK(std::abs(jac(0, 0, 0, 1) + std::sin(b)) <= 1e-12);
        // RZ acting on |0> or on a Z-diagonal readout has no effect.
        CHECK(std::abs(jac(0, 0, 0, 0)) <= 1e-12);
        CHECK(std::abs(jac(0, 0, 0, 2)) <= 1e-12);
    }
}

TEST_CASE("shift rule agrees with finite differences") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const CircuitSpec spec{3, 2};
        const auto w = QuantumLayerWeights::random(2, 3, rng);
        const auto x = random_features(rng, 3);
        const ParameterIndex p{rng.index(2), rng.index(3), rng.index(3)};
        const std::size_t out = rng.index(3);
        const double ps = param_shift_grad(x, w, spec, p, out);
        CHECK(std::abs(ps - finite_diff_oracle(x, w, spec, p, out, 1e-5)) <= 1e-6);
        const std::size_t k = QuantumLayerWeights::offset(p.layer, p.wire, p.axis, 3);
        CHECK(std::abs(ps - oracle_fd(x, w, spec, k, out)) <= 1e-6);
    }
}

TEST_CASE("jacobian") {
    SUBCASE("zero angles and features stay bounded") {
        const CircuitSpec spec{2, 1};
        const auto jac = quantum_jacobian(std::vector<double>{0, 0}, QuantumLayerWeights(1, 2), spec);
        for (std::size_t o = 0; o < 2; ++o)
            for (double v : jac.row(o))
                CHECK(std::abs(v) <= 1.0);
    }

    SUBCASE("four wires match finite differences entrywise") {
        Rng rng(8);
        const CircuitSpec spec{4, 2};
        const auto w = QuantumLayerWeights::random(2, 4, rng);
        const auto x = random_features(rng, 4);
        const auto jac = quantum_jacobian(x, w, spec);
        CHECK(jac.n_parameters() == 24);
        for (std::size_t o = 0; o < 4; ++o)
            for (std::size_t k = 0; k < jac.n_parameters(); ++k) {
                CHECK(std::abs(jac.row(o)[k] - oracle_fd(x, w, spec, k, o)) <= 1e-6);
                CHECK(std::abs(jac.row(o)[k]) <= 1.0);
            }
    }

    SUBCASE("entries equal the single-parameter rule bit for bit") {
        Rng rng(81);
        const CircuitSpec spec{3, 1, qsim::Axis::Y, 2};
        const auto w = QuantumLayerWeights::random(1, 3, rng);
        const auto x = random_features(rng, 3);
        const auto jac = quantum_jacobian(x, w, spec);
        for (std::size_t o = 0; o < 3; ++o)
            for (std::size_t wire = 0; wire < 3; ++wire)
                for (std::size_t a = 0; a < 3; ++a)
                    CHECK(jac(o, 0, wire, a) == param_shift_grad(x, w, spec, {0, wire, a}, o));
        CHECK(quantum_jacobian(x, w, spec).row(1)[4] == jac.row(1)[4]);
    }
}

TEST_CASE("worked example: symmetric shifted probabilities") {
    // The one-qubit state after the worked rotation, shifted by the printed
    // +-pi/2-style matrices [[0,-1],[1,0]] and [[0,1],[-1,0]] (RY(+-pi)).
    std::vector<qsim::Complex> plus{0.8845, 0.1446}, minus{0.8845, 0.1446};
    qsim::rotate_amplitudes(plus, 1, 0, qsim::Axis::Y, pi);
    qsim::rotate_amplitudes(minus, 1, 0, qsim::Axis::Y, -pi);
    CHECK(std::abs(plus[0].real() + 0.1446) <= 1e-12);
    CHECK(std::abs(minus[0].real() - 0.1446) <= 1e-12);
    const double f_plus = std::norm(plus[0]), f_minus = std::norm(minus[0]);
    CHECK(std::abs(f_plus - 0.0209) <= 1e-4);
    CHECK(std::abs(f_minus - 0.0209) <= 1e-4);
    CHECK(std::abs((f_plus - f_minus) / 2.0) <= 1e-15);
}

TEST_CASE("gradient argument errors") {
    const CircuitSpec spec{2, 1};
    const QuantumLayerWeights w(1, 2);
    const std::vector<double> x{0.1, 0.2};
    CHECK_THROWS_AS(param_shift_grad(x, w, spec, {1, 0, 0}, 0), IndexError);
    CHECK_THROWS_AS(param_shift_grad(x, w, spec, {0, 2, 0}, 0), IndexError);
    CHECK_THROWS_AS(param_shift_grad(x, w, spec, {0, 0, 3}, 0), IndexError);
    CHECK_THROWS_AS(param_shift_grad(x, w, spec, {0, 0, 0}, 2), IndexError);
    CHECK_THROWS_AS(finite_diff_oracle(x, w, spec, {0, 0, 0}, 0, 0.0), ArgumentError);
    CHECK_THROWS_AS(finite_diff_oracle(x, w, spec, {0, 0, 0}, 0, 0.02), ArgumentError);
    CHECK_THROWS_AS(quantum_jacobian(std::vector<double>{0.1}, w, spec), ShapeError);
}
