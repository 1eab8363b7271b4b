#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qbench/circuit.hpp"

namespace qbench {

inline constexpr double kPi = std::numbers::pi;

/// Reduces an angle to (-pi, pi].
inline double canon_angle(double t) {
    t = std::fmod(t, 2.0 * kPi);
    if (t <= -kPi)
        t += 2.0 * kPi;
    else if (t > kPi)
        t -= 2.0 * kPi;
    return t;
}

inline bool is_zero_angle(double t) { return std::abs(canon_angle(t)) < 1e-12; }

/// ZXZ Euler factorization: the returned angles satisfy
/// rz(gamma) * rx(beta) * rz(alpha) = U up to global phase
/// (circuit order: rz(alpha) first).
struct EulerZXZ {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

inline EulerZXZ decompose_1q(const Eigen::Matrix2cd& u_in) {
    if (unitarity_defect(u_in) > 1e-10) throw NotUnitary("decompose_1q: matrix is not unitary");
    const cxd det = u_in.determinant();
    const Eigen::Matrix2cd u = u_in / std::sqrt(det);
    // u = [[cos(b/2) e^{-i(a+c)/2}, -i sin(b/2) e^{-i(a-c)/2}],
    //      [-i sin(b/2) e^{i(a-c)/2}, cos(b/2) e^{i(a+c)/2}]]
    const double m00 = std::abs(u(0, 0));
    const double m01 = std::abs(u(0, 1));
    const double beta = 2.0 * std::atan2(m01, m00);
    double apc = 0.0, amc = 0.0;
    if (m01 < 1e-12) {
        apc = -2.0 * std::arg(u(0, 0));
    } else if (m00 < 1e-12) {
        amc = -2.0 * std::arg(cxd{0, 1} * u(0, 1));
    } else {
        apc = -2.0 * std::arg(u(0, 0));
        amc = -2.0 * std::arg(cxd{0, 1} * u(0, 1));
    }
    EulerZXZ e;
    e.gamma = 0.5 * (apc + amc);
    e.beta = beta;
    e.alpha = 0.5 * (apc - amc);
    return e;
}

namespace gateseq {

inline Gate make(GateKind k, std::vector<std::uint32_t> qs, std::vector<Param> ps = {}) {
    Gate g;
    g.kind = k;
    g.qubits = std::move(qs);
    g.params = std::move(ps);
    return g;
}

inline void rz(std::vector<Gate>& out, double theta, std::uint32_t q) {
    out.push_back(make(GateKind::RZ, {q}, {Param(theta)}));
}
inline void rx(std::vector<Gate>& out, double theta, std::uint32_t q) {
    out.push_back(make(GateKind::RX, {q}, {Param(theta)}));
}
inline void ry(std::vector<Gate>& out, double theta, std::uint32_t q) {
    out.push_back(make(GateKind::RY, {q}, {Param(theta)}));
}
inline void cx(std::vector<Gate>& out, std::uint32_t c, std::uint32_t t) {
    out.push_back(make(GateKind::CX, {c, t}));
}
inline void h(std::vector<Gate>& out, std::uint32_t q) {
    // h = rz(pi/2) rx(pi/2) rz(pi/2) up to global phase
    rz(out, kPi / 2, q);
    rx(out, kPi / 2, q);
    rz(out, kPi / 2, q);
}

} // namespace gateseq

/// Exact controlled-phase(theta) over {rz, cx}:
/// rz(t/2) on control; cx; rz(-t/2) on target; cx; rz(t/2) on target.
inline std::vector<Gate> decompose_cp(double theta, std::uint32_t control, std::uint32_t target) {
    std::vector<Gate> out;
    gateseq::rz(out, theta / 2, control);
    gateseq::cx(out, control, target);
    gateseq::rz(out, -theta / 2, target);
    gateseq::cx(out, control, target);
    gateseq::rz(out, theta / 2, target);
    return out;
}

namespace mux_detail {

inline std::uint64_t gray(std::uint64_t i) { return i ^ (i >> 1); }

inline int parity64(std::uint64_t v) {
    v ^= v >> 32;
    v ^= v >> 16;
    v ^= v >> 8;
    v ^= v >> 4;
    v ^= v >> 2;
    v ^= v >> 1;
    return static_cast<int>(v & 1);
}

} // namespace mux_detail

/// Uniformly controlled rotation (rz or ry multiplexor): applies
/// R(angles[x]) to the target for control pattern x (bit j of x = state of
/// controls[j]). Gray-code construction with exactly 2^k cx gates; the slot
/// angles are the Walsh transform of the pattern angles.
inline void multiplexed_rot(std::vector<Gate>& out, GateKind axis,
                            const std::vector<std::uint32_t>& controls, std::uint32_t target,
                            const std::vector<double>& angles) {
    const std::size_t k = controls.size();
    if (k == 0) {
        out.push_back(gateseq::make(axis, {target}, {Param(angles.at(0))}));
        return;
    }
    const std::uint64_t terms = std::uint64_t{1} << k;
    for (std::uint64_t i = 0; i < terms; ++i) {
        double phi = 0.0;
        const std::uint64_t gi = mux_detail::gray(i);
        for (std::uint64_t x = 0; x < terms; ++x)
            phi += (mux_detail::parity64(gi & x) ? -1.0 : 1.0) * angles[x];
        phi /= static_cast<double>(terms);
        out.push_back(gateseq::make(axis, {target}, {Param(phi)}));
        const std::size_t flip = (i + 1 < terms) ? static_cast<std::size_t>(std::countr_zero(i + 1))
                                                 : k - 1;
        gateseq::cx(out, controls[flip], target);
    }
}

/// Multi-controlled phase(theta): phase e^{i theta} exactly when all
/// controls and the target are |1>, up to one global phase. Telescoping
/// phase multiplexors: 2^k-term multiplexed rz on the target, then the
/// residual controls-only diagonal handled recursively with theta/2.
inline void mcp(std::vector<Gate>& out, double theta, std::vector<std::uint32_t> controls,
                std::uint32_t target) {
    while (true) {
        const std::size_t k = controls.size();
        if (k == 0) {
            gateseq::rz(out, theta, target);
            return;
        }
        const std::uint64_t terms = std::uint64_t{1} << k;
        // Pattern angles theta * [x == all-ones]; Walsh transform collapses to
        // +-theta/2^k with the sign given by popcount parity of gray(i).
        for (std::uint64_t i = 0; i < terms; ++i) {
            const double phi = (mux_detail::parity64(mux_detail::gray(i)) ? -1.0 : 1.0) * theta /
                               static_cast<double>(terms);
            gateseq::rz(out, phi, target);
            const std::size_t flip = (i + 1 < terms)
                                         ? static_cast<std::size_t>(std::countr_zero(i + 1))
                                         : k - 1;
            gateseq::cx(out, controls[flip], target);
        }
        target = controls.back();
        controls.pop_back();
        theta /= 2.0;
    }
}

/// Exact multi-controlled X over {h, rz, cx} with zero ancillas: MCZ as a
/// phase multiplexor conjugated by Hadamards on the target. k = 1 is a bare
/// cx; k = 2 reproduces the 6-cx Toffoli network.
inline std::vector<Gate> decompose_mcx(const std::vector<std::uint32_t>& controls,
                                       std::uint32_t target) {
    std::vector<Gate> out;
    if (controls.empty()) {
        out.push_back(gateseq::make(GateKind::X, {target}));
        return out;
    }
    if (controls.size() == 1) {
        gateseq::cx(out, controls[0], target);
        return out;
    }
    gateseq::h(out, target);
    mcp(out, kPi, controls, target);
    gateseq::h(out, target);
    return out;
}

// ---------------------------------------------------------------------------
// Two-qubit (Cartan) decomposition.
//
// Matrix convention for a gate on qubits [q_low, q_high]: local basis index
// = bit(q_low) + 2*bit(q_high), i.e. matrices are kron(op_high, op_low).
// ---------------------------------------------------------------------------

namespace kak_detail {

inline const Eigen::Matrix4cd& magic_basis() {
    static const Eigen::Matrix4cd b = [] {
        const double s = 1.0 / std::sqrt(2.0);
        Eigen::Matrix4cd m;
        const cxd i{0.0, 1.0};
        m << cxd{s, 0}, 0, 0, i * s,
             0, i * s, cxd{s, 0}, 0,
             0, i * s, cxd{-s, 0}, 0,
             cxd{s, 0}, 0, 0, -i * s;
        return m;
    }();
    return b;
}

/// Simultaneous real diagonalization of a complex symmetric unitary W:
/// returns orthogonal Q and the diagonal of Q^T W Q. Re(W) and Im(W) are
/// commuting real symmetric matrices; diagonalize Re, then Im restricted to
/// each degenerate eigenspace of Re.
inline std::pair<Eigen::Matrix4d, Eigen::Vector4cd> diag_symmetric_unitary(const Eigen::Matrix4cd& w) {
    const Eigen::Matrix4d re = w.real();
    const Eigen::Matrix4d im = w.imag();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(re);
    Eigen::Matrix4d q = es.eigenvectors();
    const Eigen::Vector4d ev = es.eigenvalues();

    int start = 0;
    while (start < 4) {
        int end = start + 1;
        while (end < 4 && std::abs(ev(end) - ev(start)) < 3e-8) ++end;
        const int m = end - start;
        if (m > 1) {
            Eigen::MatrixXd block = q.middleCols(start, m).transpose() * im * q.middleCols(start, m);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(block);
            q.middleCols(start, m) = q.middleCols(start, m) * es2.eigenvectors();
        }
        start = end;
    }

    Eigen::Matrix4cd d = q.transpose() * w * q;
    double off = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if (r != c) off = std::max(off, std::abs(d(r, c)));
    if (off > 1e-8)
        throw NumericalBreakdown("two-qubit decomposition: simultaneous diagonalization failed");
    return {q, d.diagonal()};
}

} // namespace kak_detail

/// Canonical interaction block exp(i (a XX + b YY + c ZZ)) realized with
/// exactly three cx gates (the optimal construction); equality holds up to
/// global phase. Angle / direction conventions are pinned by the unit tests
/// against the closed-form matrix.
inline std::vector<Gate> canonical_block(double a, double b, double c, std::uint32_t q_low,
                                         std::uint32_t q_high) {
    const double lambda = c - kPi / 4;
    const double mu = a - kPi / 4;
    const double nu = kPi / 4 - b;
    std::vector<Gate> out;
    gateseq::rz(out, kPi / 2, q_high);
    gateseq::cx(out, q_low, q_high);
    gateseq::ry(out, -2.0 * nu, q_low);
    gateseq::cx(out, q_high, q_low);
    gateseq::rz(out, -2.0 * lambda, q_high);
    gateseq::ry(out, -2.0 * mu, q_low);
    // the closing local rotation commutes with the last cx (control side);
    // emitting it first keeps both qubits' schedules aligned
    gateseq::rz(out, -kPi / 2, q_low);
    gateseq::cx(out, q_low, q_high);
    return out;
}

/// Closed-form matrix of the canonical block (test oracle and HAMSIM brick).
inline Eigen::Matrix4cd canonical_matrix(double a, double b, double c) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    const cxd eic = std::polar(1.0, c);
    const cxd emc = std::polar(1.0, -c);
    const cxd i{0.0, 1.0};
    m(0, 0) = eic * std::cos(a - b);
    m(3, 3) = eic * std::cos(a - b);
    m(0, 3) = i * eic * std::sin(a - b);
    m(3, 0) = i * eic * std::sin(a - b);
    m(1, 1) = emc * std::cos(a + b);
    m(2, 2) = emc * std::cos(a + b);
    m(1, 2) = i * emc * std::sin(a + b);
    m(2, 1) = i * emc * std::sin(a + b);
    return m;
}

namespace kak_detail {

/// Splits a (near-)tensor-product 4x4 into kron(high, low) factors.
inline std::pair<Eigen::Matrix2cd, Eigen::Matrix2cd> kron_factor(const Eigen::Matrix4cd& m) {
    int br = 0, bc = 0;
    double best = -1.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            const double n = m.block<2, 2>(2 * r, 2 * c).norm();
            if (n > best) {
                best = n;
                br = r;
                bc = c;
            }
        }
    Eigen::Matrix2cd low = m.block<2, 2>(2 * br, 2 * bc);
    low *= std::sqrt(2.0) / low.norm();
    Eigen::Matrix2cd high;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            high(r, c) = (low.adjoint() * m.block<2, 2>(2 * r, 2 * c)).trace() / 2.0;
    return {high, low};
}

} // namespace kak_detail

/// Cartan (KAK) decomposition of an arbitrary two-qubit unitary into at most
/// three cx plus single-qubit rz/rx/ry rotations; the reconstruction equals
/// the input up to global phase. Deterministic: equal inputs produce equal
/// gate sequences.
inline std::vector<Gate> decompose_2q(const Eigen::Matrix4cd& u_in, std::uint32_t q_low,
                                      std::uint32_t q_high) {
    if (unitarity_defect(u_in) > 1e-10) throw NotUnitary("decompose_2q: matrix is not unitary");
    const cxd det = u_in.determinant();
    const Eigen::Matrix4cd u = u_in / std::pow(det, 0.25);

    // Tensor products need no entangling gates (zero-angle elision at the
    // interaction level).
    {
        auto [high, low] = kak_detail::kron_factor(u);
        Eigen::Matrix4cd rec;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) rec.block<2, 2>(2 * r, 2 * c) = high(r, c) * low;
        if ((rec - u).cwiseAbs().maxCoeff() < 1e-10) {
            std::vector<Gate> out;
            const EulerZXZ el = decompose_1q(low);
            gateseq::rz(out, el.alpha, q_low);
            gateseq::rx(out, el.beta, q_low);
            gateseq::rz(out, el.gamma, q_low);
            const EulerZXZ eh = decompose_1q(high);
            gateseq::rz(out, eh.alpha, q_high);
            gateseq::rx(out, eh.beta, q_high);
            gateseq::rz(out, eh.gamma, q_high);
            return out;
        }
    }

    const Eigen::Matrix4cd& bm = kak_detail::magic_basis();
    const Eigen::Matrix4cd v = bm.adjoint() * u * bm;
    const Eigen::Matrix4cd w = v.transpose() * v;

    auto [q, d] = kak_detail::diag_symmetric_unitary(w);
    if (q.determinant() < 0) q.col(0) *= -1.0;

    std::array<double, 4> phi{};
    for (int j = 0; j < 4; ++j) phi[j] = 0.5 * std::arg(d(j));

    // det W = 1, so sum(phi) is a multiple of pi; shift branches until the
    // sum is exactly zero. This makes the magic-basis diagonal equal the
    // canonical interaction (up to global phase) and forces det L = +1.
    const long shift = std::lround((phi[0] + phi[1] + phi[2] + phi[3]) / kPi);
    if (shift != 0) {
        const double step = shift > 0 ? -kPi : kPi;
        phi[0] += step;
        if (std::abs(shift) == 2) phi[1] += step;
    }

    Eigen::Vector4cd ainv;
    for (int j = 0; j < 4; ++j) ainv(j) = std::polar(1.0, -phi[j]);
    const Eigen::Matrix4cd l = v * q.cast<cxd>() * ainv.asDiagonal();
    if (l.imag().cwiseAbs().maxCoeff() > 1e-8 || l.real().determinant() < 0)
        throw NumericalBreakdown("two-qubit decomposition: left factor is not special orthogonal");

    const double ca = (phi[0] + phi[1]) / 2;
    const double cb = (phi[1] + phi[3]) / 2;
    const double cc = (phi[0] + phi[3]) / 2;

    const Eigen::Matrix4cd k1 = bm * l * bm.adjoint();
    const Eigen::Matrix4cd k2 = bm * q.transpose().cast<cxd>() * bm.adjoint();
    auto [k1_high, k1_low] = kak_detail::kron_factor(k1);
    auto [k2_high, k2_low] = kak_detail::kron_factor(k2);

    std::vector<Gate> out;
    auto emit_1q = [&](const Eigen::Matrix2cd& m, std::uint32_t qubit) {
        const EulerZXZ e = decompose_1q(m);
        gateseq::rz(out, e.alpha, qubit);
        gateseq::rx(out, e.beta, qubit);
        gateseq::rz(out, e.gamma, qubit);
    };
    emit_1q(k2_low, q_low);
    emit_1q(k2_high, q_high);
    auto mid = canonical_block(ca, cb, cc, q_low, q_high);
    out.insert(out.end(), mid.begin(), mid.end());
    emit_1q(k1_low, q_low);
    emit_1q(k1_high, q_high);
    return out;
}

// ---------------------------------------------------------------------------
// Standard-basis transpilation.
// ---------------------------------------------------------------------------

/// True when the circuit only uses the standard vocabulary: rx/ry/rz/cx plus
/// measure, reset, and barriers (conditions allowed on the rotations and x).
inline bool is_standard_basis(const Circuit& c) {
    for (const Gate& g : c.gates()) {
        switch (g.kind) {
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ:
        case GateKind::CX:
        case GateKind::Measure:
        case GateKind::Reset:
        case GateKind::Barrier: break;
        default: return false;
        }
    }
    return true;
}

/// Exact transpilation of any circuit into the standard basis
/// {rx, ry, rz, cx} (+ measure/reset/conditioned rotations). Deterministic;
/// no optimization beyond angle canonicalization into (-pi, pi] and elision
/// of zero-angle rotations; never adds qubits. The unitary part equals the
/// source circuit up to global phase.
inline Circuit transpile_standard(const Circuit& c) {
    if (has_symbols(c)) throw UnboundParameter("transpile_standard: circuit has unbound parameters");
    Circuit out(c.width(), c.num_clbits(), c.name());
    out.set_tag(c.tag());

    auto push = [&out](Gate g, const std::optional<Condition>& cond) {
        if (g.kind == GateKind::X) {
            g.kind = GateKind::RX;
            g.params = {Param(kPi)};
        }
        if (g.kind == GateKind::RX || g.kind == GateKind::RY || g.kind == GateKind::RZ) {
            const double t = canon_angle(g.params[0].value);
            if (std::abs(t) < 1e-12) return;
            g.params[0] = Param(t);
        }
        if (cond) g.condition = cond;
        out.append(std::move(g));
    };

    for (const Gate& g : c.gates()) {
        const auto cond = g.condition;
        switch (g.kind) {
        case GateKind::Measure:
        case GateKind::Reset:
        case GateKind::Barrier:
        case GateKind::CX: {
            Gate copy = g;
            out.append(std::move(copy));
            break;
        }
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ: {
            Gate copy = g;
            copy.condition.reset();
            push(std::move(copy), cond);
            break;
        }
        case GateKind::X:
            push(gateseq::make(GateKind::RX, {g.qubits[0]}, {Param(kPi)}), cond);
            break;
        case GateKind::H: {
            std::vector<Gate> seq;
            gateseq::h(seq, g.qubits[0]);
            for (auto& s : seq) push(std::move(s), cond);
            break;
        }
        case GateKind::CZ: {
            std::vector<Gate> seq;
            gateseq::h(seq, g.qubits[1]);
            gateseq::cx(seq, g.qubits[0], g.qubits[1]);
            gateseq::h(seq, g.qubits[1]);
            for (auto& s : seq) push(std::move(s), cond);
            break;
        }
        case GateKind::CP: {
            for (auto& s : decompose_cp(g.params[0].value, g.qubits[0], g.qubits[1]))
                push(std::move(s), cond);
            break;
        }
        case GateKind::SWAP: {
            std::vector<Gate> seq;
            gateseq::cx(seq, g.qubits[0], g.qubits[1]);
            gateseq::cx(seq, g.qubits[1], g.qubits[0]);
            gateseq::cx(seq, g.qubits[0], g.qubits[1]);
            for (auto& s : seq) push(std::move(s), cond);
            break;
        }
        case GateKind::CCX:
        case GateKind::MCX: {
            std::vector<std::uint32_t> controls(g.qubits.begin(), g.qubits.end() - 1);
            for (auto& s : decompose_mcx(controls, g.qubits.back())) push(std::move(s), cond);
            break;
        }
        case GateKind::U2Q: {
            for (auto& s : decompose_2q(*g.matrix, g.qubits[0], g.qubits[1]))
                push(std::move(s), cond);
            break;
        }
        }
    }
    return out;
}

} // namespace qbench
