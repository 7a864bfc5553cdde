// Independent reference implementations used only by tests. Nothing here
// calls into the library's kernels: circuits are built as dense unitaries
// from Kronecker products, metrics are brute-forced from their definitions.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline CMat rx(double t) {
    CMat m(2, 2);
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    m << C(c, 0), C(0, -s), C(0, -s), C(c, 0);
    return m;
}

inline CMat ry(double t) {
    CMat m(2, 2);
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    m << c, -s, s, c;
    return m;
}

inline CMat rz(double t) {
    CMat m = CMat::Zero(2, 2);
    m(0, 0) = std::polar(1.0, -t / 2);
    m(1, 1) = std::polar(1.0, t / 2);
    return m;
}

inline CMat kron(const CMat &a, const CMat &b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Gate `g` on `wire` of an n-qubit register, wire 0 leftmost in the product.
inline CMat on_wire(const CMat &g, std::size_t wire, std::size_t n) {
    CMat out = CMat::Identity(1, 1);
    for (std::size_t w = 0; w < n; ++w)
        out = kron(out, w == wire ? g : CMat::Identity(2, 2));
    return out;
}

/// CNOT as a permutation matrix over basis states, big-endian.
inline CMat cnot(std::size_t control, std::size_t target, std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    CMat m = CMat::Zero(dim, dim);
    for (std::size_t k = 0; k < dim; ++k) {
        const bool c = (k >> (n - 1 - control)) & 1U;
        const std::size_t out = c ? k ^ (std::size_t{1} << (n - 1 - target)) : k;
        m(out, k) = 1.0;
    }
    return m;
}

/// <Z_wire> by direct summation.
inline double expval_z(const CVec &psi, std::size_t wire, std::size_t n) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
        const bool bit = (static_cast<std::size_t>(k) >> (n - 1 - wire)) & 1U;
        acc += (bit ? -1.0 : 1.0) * std::norm(psi(k));
    }
    return acc;
}

/// Full circuit: RY/RX/RZ embedding, then per layer Rot = RZ(a)RY(b)RZ(c)
/// on each wire followed by the CNOT ring. angles[(l*n + w)*3 + a].
inline std::vector<double> circuit(std::span<const double> x, std::span<const double> angles,
                                   std::size_t n, std::size_t layers, char axis = 'Y',
                                   std::size_t range = 1) {
    const std::size_t dim = std::size_t{1} << n;
    CVec psi = CVec::Zero(dim);
    psi(0) = 1.0;
    for (std::size_t w = 0; w < n; ++w) {
        const CMat g = axis == 'X' ? rx(x[w]) : axis == 'Z' ? rz(x[w]) : ry(x[w]);
        psi = on_wire(g, w, n) * psi;
    }
    for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t w = 0; w < n; ++w) {
            const double *a = &angles[(l * n + w) * 3];
            psi = on_wire(rz(a[0]) * ry(a[1]) * rz(a[2]), w, n) * psi;
        }
        if (n > 1)
            for (std::size_t w = 0; w < n; ++w)
                psi = cnot(w, (w + range) % n, n) * psi;
    }
    std::vector<double> out(n);
    for (std::size_t w = 0; w < n; ++w)
        out[w] = expval_z(psi, w, n);
    return out;
}

/// All positive/negative pairs, ties counted half. Exact in rationals:
/// returns (twice the win count, P*N) so callers can compare exactly.
struct PairCount {
    std::uint64_t twice_wins = 0;
    std::uint64_t pairs = 0;
};

inline PairCount auc_pairs(std::span<const double> scores, std::size_t n_classes,
                           std::span<const std::size_t> y, std::size_t cls) {
    PairCount pc;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != cls)
            continue;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] == cls)
                continue;
            const double si = scores[i * n_classes + cls], sj = scores[j * n_classes + cls];
            pc.twice_wins += si > sj ? 2 : si == sj ? 1 : 0;
            ++pc.pairs;
        }
    }
    return pc;
}

inline std::vector<double> uniform_vector(std::mt19937_64 &gen, std::size_t n, double lo,
                                          double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto &x : v)
        x = d(gen);
    return v;
}

} // namespace oracle
