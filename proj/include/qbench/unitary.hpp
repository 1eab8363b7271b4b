#pragma once

#include <Eigen/Dense>

#include "qbench/circuit.hpp"
#include "qbench/simulator.hpp"

namespace qbench {

/// Full unitary of a measurement-free circuit, built column by column with
/// the statevector kernels. Intended for verification on small widths.
inline Eigen::MatrixXcd circuit_unitary(const Circuit& c, std::uint32_t width_limit = 12) {
    if (c.width() > width_limit)
        throw WidthLimitExceeded("circuit_unitary: width exceeds limit");
    for (const Gate& g : c.gates())
        if (!g.is_unitary() || g.condition)
            throw Error("circuit_unitary: circuit contains non-unitary elements");
    const std::size_t dim = std::size_t{1} << c.width();
    Eigen::MatrixXcd u(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        sim_detail::StateVector sv(c.width());
        sv.amp[0] = 0.0;
        sv.amp[col] = 1.0;
        for (const Gate& g : c.gates()) sim_detail::apply_gate(sv, g);
        for (std::size_t row = 0; row < dim; ++row) u(row, col) = sv.amp[row];
    }
    return u;
}

inline Eigen::MatrixXcd gates_unitary(std::uint32_t width, const std::vector<Gate>& gates) {
    Circuit c(width);
    c.append_all(gates);
    return circuit_unitary(c);
}

/// Max-norm distance between unitaries modulo global phase: aligns the
/// phases at the largest entry of a, then takes the elementwise max norm.
inline double phase_insensitive_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
    Eigen::Index r = 0, c = 0;
    a.cwiseAbs().maxCoeff(&r, &c);
    if (std::abs(b(r, c)) < 1e-14) return (a - b).cwiseAbs().maxCoeff();
    const cxd phase = a(r, c) / b(r, c);
    return (a - (phase / std::abs(phase)) * b).cwiseAbs().maxCoeff();
}

namespace gate_matrices {

inline Eigen::Matrix2cd rx(double t) {
    Eigen::Matrix2cd m;
    const double h = t / 2;
    m << cxd{std::cos(h), 0}, cxd{0, -std::sin(h)}, cxd{0, -std::sin(h)}, cxd{std::cos(h), 0};
    return m;
}
inline Eigen::Matrix2cd ry(double t) {
    Eigen::Matrix2cd m;
    const double h = t / 2;
    m << cxd{std::cos(h), 0}, cxd{-std::sin(h), 0}, cxd{std::sin(h), 0}, cxd{std::cos(h), 0};
    return m;
}
inline Eigen::Matrix2cd rz(double t) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = std::polar(1.0, -t / 2);
    m(1, 1) = std::polar(1.0, t / 2);
    return m;
}
inline Eigen::Matrix2cd hadamard() {
    Eigen::Matrix2cd m;
    const double s = 1.0 / std::sqrt(2.0);
    m << s, s, s, -s;
    return m;
}
inline Eigen::Matrix2cd pauli(int p) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    switch (p) {
    case 0: m.setIdentity(); break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << cxd{0, 0}, cxd{0, -1}, cxd{0, 1}, cxd{0, 0}; break;
    default: m << 1, 0, 0, -1; break;
    }
    return m;
}

} // namespace gate_matrices

} // namespace qbench
