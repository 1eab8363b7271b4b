#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "qbench/circuit.hpp"
#include "qbench/rng.hpp"
#include "qbench/transpile.hpp"
#include "qbench/unitary.hpp"

using namespace qbench;
namespace gm = qbench::gate_matrices;

namespace {

Eigen::Matrix4cd haar_su4(Rng& rng) {
    Eigen::Matrix4cd g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = cxd{rng.normal(), rng.normal()};
    Eigen::HouseholderQR<Eigen::Matrix4cd> qr(g);
    Eigen::Matrix4cd q = qr.householderQ();
    Eigen::Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < 4; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
    q /= std::pow(q.determinant(), 0.25);
    return q;
}

Eigen::MatrixXcd seq_unitary(std::uint32_t width, const std::vector<Gate>& gates) {
    return gates_unitary(width, gates);
}

} // namespace

TEST_CASE("decompose_1q reproduces its input up to phase") {
    SUBCASE("identity admits zero angles") {
        auto e = decompose_1q(Eigen::Matrix2cd::Identity());
        Eigen::Matrix2cd rec = gm::rz(e.gamma) * gm::rx(e.beta) * gm::rz(e.alpha);
        CHECK(phase_insensitive_distance(Eigen::Matrix2cd::Identity(), rec) < 1e-12);
    }
    SUBCASE("rx(0.7) stays in basis") {
        auto e = decompose_1q(gm::rx(0.7));
        Eigen::Matrix2cd rec = gm::rz(e.gamma) * gm::rx(e.beta) * gm::rz(e.alpha);
        CHECK(phase_insensitive_distance(gm::rx(0.7), rec) < 1e-12);
        CHECK(e.beta == doctest::Approx(0.7));
    }
    SUBCASE("hadamard") {
        auto e = decompose_1q(gm::hadamard());
        Eigen::Matrix2cd rec = gm::rz(e.gamma) * gm::rx(e.beta) * gm::rz(e.alpha);
        CHECK(phase_insensitive_distance(gm::hadamard(), rec) < 1e-9);
    }
    SUBCASE("random unitaries") {
        Rng rng(11);
        for (int i = 0; i < 200; ++i) {
            Eigen::Matrix2cd g;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) g(r, c) = cxd{rng.normal(), rng.normal()};
            Eigen::HouseholderQR<Eigen::Matrix2cd> qr(g);
            Eigen::Matrix2cd q = qr.householderQ();
            auto e = decompose_1q(q);
            Eigen::Matrix2cd rec = gm::rz(e.gamma) * gm::rx(e.beta) * gm::rz(e.alpha);
            CHECK(phase_insensitive_distance(q, rec) < 1e-9);
        }
    }
    SUBCASE("non-unitary input rejected") {
        Eigen::Matrix2cd bad;
        bad << 1, 1, 0, 1;
        CHECK_THROWS_AS(decompose_1q(bad), NotUnitary);
    }
}

TEST_CASE("h transpiles to the rz rx rz triple") {
    Circuit c(1);
    c.h(0);
    Circuit t = transpile_standard(c);
    REQUIRE(t.size() == 3);
    CHECK(t.gates()[0].kind == GateKind::RZ);
    CHECK(t.gates()[1].kind == GateKind::RX);
    CHECK(t.gates()[2].kind == GateKind::RZ);
    for (const auto& g : t.gates()) CHECK(g.params[0].value == doctest::Approx(kPi / 2));
    CHECK(phase_insensitive_distance(circuit_unitary(c), circuit_unitary(t)) < 1e-12);
}

TEST_CASE("swap transpiles to exactly three cx") {
    Circuit c(2);
    c.swap(0, 1);
    Circuit t = transpile_standard(c);
    REQUIRE(t.size() == 3);
    for (const auto& g : t.gates()) CHECK(g.kind == GateKind::CX);
    CHECK(phase_insensitive_distance(circuit_unitary(c), circuit_unitary(t)) < 1e-12);
}

TEST_CASE("decompose_cp matches controlled-phase matrices") {
    for (double theta : {0.0, kPi, kPi / 2, -1.234, 2.95}) {
        auto seq = decompose_cp(theta, 0, 1);
        Eigen::Matrix4cd expect = Eigen::Matrix4cd::Identity();
        expect(3, 3) = std::polar(1.0, theta);
        CHECK(phase_insensitive_distance(expect, seq_unitary(2, seq)) < 1e-12);
    }
    SUBCASE("theta = pi equals cz") {
        Circuit c(2);
        c.cz(0, 1);
        CHECK(phase_insensitive_distance(circuit_unitary(c),
                                         seq_unitary(2, decompose_cp(kPi, 0, 1))) < 1e-12);
    }
}

TEST_CASE("multiplexed_rot applies the selected rotation per control pattern") {
    Rng rng(23);
    for (std::size_t k = 1; k <= 4; ++k) {
        std::vector<std::uint32_t> controls(k);
        for (std::size_t j = 0; j < k; ++j) controls[j] = static_cast<std::uint32_t>(j + 1);
        const std::uint32_t target = 0;
        std::vector<double> angles(std::size_t{1} << k);
        for (auto& a : angles) a = rng.uniform(-kPi, kPi);

        for (GateKind axis : {GateKind::RZ, GateKind::RY}) {
            std::vector<Gate> seq;
            multiplexed_rot(seq, axis, controls, target, angles);
            const auto got = seq_unitary(static_cast<std::uint32_t>(k + 1), seq);

            const std::size_t dim = std::size_t{2} << k;
            Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(dim, dim);
            for (std::uint64_t x = 0; x < (std::uint64_t{1} << k); ++x) {
                const Eigen::Matrix2cd r =
                    axis == GateKind::RZ ? gm::rz(angles[x]) : gm::ry(angles[x]);
                // control pattern x occupies qubits 1..k, target is bit 0
                std::uint64_t base = 0;
                for (std::size_t j = 0; j < k; ++j)
                    if ((x >> j) & 1) base |= std::uint64_t{1} << (j + 1);
                for (int tb = 0; tb < 2; ++tb)
                    for (int tb2 = 0; tb2 < 2; ++tb2)
                        expect(base | static_cast<std::uint64_t>(tb), base | static_cast<std::uint64_t>(tb2)) =
                            r(tb, tb2);
            }
            CHECK(phase_insensitive_distance(expect, got) < 1e-9);
        }
    }
}

TEST_CASE("mcp applies a phase only on the all-ones state") {
    Rng rng(5);
    for (std::size_t k = 1; k <= 3; ++k) {
        const double theta = rng.uniform(-kPi, kPi);
        std::vector<std::uint32_t> controls(k);
        for (std::size_t j = 0; j < k; ++j) controls[j] = static_cast<std::uint32_t>(j);
        std::vector<Gate> seq;
        mcp(seq, theta, controls, static_cast<std::uint32_t>(k));
        const std::size_t dim = std::size_t{2} << k;
        Eigen::MatrixXcd expect = Eigen::MatrixXcd::Identity(dim, dim);
        expect(dim - 1, dim - 1) = std::polar(1.0, theta);
        CHECK(phase_insensitive_distance(expect, seq_unitary(static_cast<std::uint32_t>(k + 1), seq)) <
              1e-9);
    }
}

TEST_CASE("decompose_mcx: cx counts and unitary equivalence") {
    SUBCASE("one control is a bare cx") {
        auto seq = decompose_mcx({0}, 1);
        REQUIRE(seq.size() == 1);
        CHECK(seq[0].kind == GateKind::CX);
    }
    SUBCASE("two controls use six cx") {
        auto seq = decompose_mcx({0, 1}, 2);
        int cx_count = 0;
        for (const auto& g : seq) cx_count += g.kind == GateKind::CX;
        CHECK(cx_count == 6);
        Eigen::MatrixXcd expect = Eigen::MatrixXcd::Identity(8, 8);
        expect(3, 3) = 0;
        expect(7, 7) = 0;
        expect(3, 7) = 1;
        expect(7, 3) = 1;
        CHECK(phase_insensitive_distance(expect, seq_unitary(3, seq)) < 1e-9);
    }
    SUBCASE("four controls equal C4X on five qubits") {
        auto seq = decompose_mcx({0, 1, 2, 3}, 4);
        Eigen::MatrixXcd expect = Eigen::MatrixXcd::Identity(32, 32);
        expect(15, 15) = 0;
        expect(31, 31) = 0;
        expect(15, 31) = 1;
        expect(31, 15) = 1;
        CHECK(phase_insensitive_distance(expect, seq_unitary(5, seq)) < 1e-9);
    }
}

TEST_CASE("canonical_block matches the closed-form interaction matrix") {
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(-2.0, 2.0);
        const double c = rng.uniform(-2.0, 2.0);
        auto seq = canonical_block(a, b, c, 0, 1);
        CHECK(phase_insensitive_distance(canonical_matrix(a, b, c), seq_unitary(2, seq)) < 1e-9);
    }
}

TEST_CASE("canonical_matrix equals the exponential it claims to be") {
    // exp(i(a XX + b YY + c ZZ)) via explicit 4x4 exponential
    Rng rng(37);
    for (int i = 0; i < 20; ++i) {
        const double a = rng.uniform(-1.5, 1.5);
        const double b = rng.uniform(-1.5, 1.5);
        const double c = rng.uniform(-1.5, 1.5);
        Eigen::Matrix4cd xx = Eigen::kroneckerProduct(gm::pauli(1), gm::pauli(1));
        Eigen::Matrix4cd yy = Eigen::kroneckerProduct(gm::pauli(2), gm::pauli(2));
        Eigen::Matrix4cd zz = Eigen::kroneckerProduct(gm::pauli(3), gm::pauli(3));
        Eigen::Matrix4cd h = a * xx + b * yy + c * zz;
        Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(cxd{0, 1} * h);
        Eigen::Matrix4cd expm = es.eigenvectors() *
                                es.eigenvalues().array().exp().matrix().asDiagonal() *
                                es.eigenvectors().inverse();
        CHECK((expm - canonical_matrix(a, b, c)).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("decompose_2q: structured cases") {
    SUBCASE("identity yields no cx") {
        auto seq = decompose_2q(Eigen::Matrix4cd::Identity(), 0, 1);
        int cx_count = 0;
        for (const auto& g : seq) cx_count += g.kind == GateKind::CX;
        CHECK(cx_count <= 3);
        CHECK(phase_insensitive_distance(Eigen::Matrix4cd::Identity(), seq_unitary(2, seq)) < 1e-8);
    }
    SUBCASE("cx reconstructs") {
        Circuit c(2);
        c.cx(0, 1);
        const Eigen::MatrixXcd target = circuit_unitary(c);
        auto seq = decompose_2q(target, 0, 1);
        CHECK(phase_insensitive_distance(target, seq_unitary(2, seq)) < 1e-8);
    }
    SUBCASE("swap reconstructs") {
        Circuit c(2);
        c.swap(0, 1);
        const Eigen::MatrixXcd target = circuit_unitary(c);
        auto seq = decompose_2q(target, 0, 1);
        CHECK(phase_insensitive_distance(target, seq_unitary(2, seq)) < 1e-8);
    }
    SUBCASE("non-unitary rejected") {
        Eigen::Matrix4cd bad = Eigen::Matrix4cd::Identity();
        bad(0, 1) = 0.5;
        CHECK_THROWS_AS(decompose_2q(bad, 0, 1), NotUnitary);
    }
}

TEST_CASE("decompose_2q: 1000 Haar-random SU(4) reconstruct within 1e-8") {
    Rng rng(12345);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Matrix4cd u = haar_su4(rng);
        auto seq = decompose_2q(u, 0, 1);
        int cx_count = 0;
        for (const auto& g : seq) cx_count += g.kind == GateKind::CX;
        REQUIRE(cx_count <= 3);
        worst = std::max(worst, phase_insensitive_distance(u, seq_unitary(2, seq)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("transpile_standard: ccx yields six cx and the right permutation") {
    Circuit c(3);
    c.ccx(0, 1, 2);
    Circuit t = transpile_standard(c);
    CHECK(is_standard_basis(t));
    int cx_count = 0;
    for (const auto& g : t.gates()) cx_count += g.kind == GateKind::CX;
    CHECK(cx_count == 6);
    CHECK(phase_insensitive_distance(circuit_unitary(c), circuit_unitary(t)) < 1e-8);
}

TEST_CASE("transpile_standard: determinism and no added qubits") {
    Rng rng(99);
    Circuit c(3);
    c.h(0).cp(0.77, 0, 2).swap(1, 2).ccx(0, 1, 2).u2q(haar_su4(rng), 0, 2);
    Circuit t1 = transpile_standard(c);
    Circuit t2 = transpile_standard(c);
    CHECK(dump(t1) == dump(t2));
    CHECK(t1.width() == c.width());
    CHECK(is_standard_basis(t1));
    CHECK(phase_insensitive_distance(circuit_unitary(c), circuit_unitary(t1)) < 1e-8);
}

TEST_CASE("transpile_standard: conditions ride along") {
    Circuit c(2, 1);
    c.measure(0, 0);
    c.x(1).if_bit(0, 1);
    Circuit t = transpile_standard(c);
    bool found = false;
    for (const auto& g : t.gates()) {
        if (g.condition) {
            found = true;
            CHECK(g.kind == GateKind::RX);
            CHECK(g.condition->clbit == 0);
        }
    }
    CHECK(found);
}

TEST_CASE("transpile_standard on random vocabulary circuits (unitary oracle)") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.uniform_int(3)); // 2..4
        Circuit c(n);
        const int gates = 4 + static_cast<int>(rng.uniform_int(10));
        for (int i = 0; i < gates; ++i) {
            const auto q = static_cast<std::uint32_t>(rng.uniform_int(n));
            auto q2 = static_cast<std::uint32_t>(rng.uniform_int(n));
            if (q2 == q) q2 = (q + 1) % n;
            switch (rng.uniform_int(9)) {
            case 0: c.x(q); break;
            case 1: c.h(q); break;
            case 2: c.rx(rng.uniform(-kPi, kPi), q); break;
            case 3: c.rz(rng.uniform(-kPi, kPi), q); break;
            case 4: c.cx(q, q2); break;
            case 5: c.cz(q, q2); break;
            case 6: c.cp(rng.uniform(-kPi, kPi), q, q2); break;
            case 7: c.swap(q, q2); break;
            default: c.u2q(haar_su4(rng), q, q2); break;
            }
        }
        Circuit t = transpile_standard(c);
        CHECK(is_standard_basis(t));
        CHECK(phase_insensitive_distance(circuit_unitary(c), circuit_unitary(t)) < 1e-8);
    }
}

TEST_CASE("decompose_2q: tensor products emit no entangling gates") {
    Rng rng(808);
    auto count_cx = [](const std::vector<Gate>& seq) {
        int n = 0;
        for (const auto& g : seq) n += g.kind == GateKind::CX;
        return n;
    };
    CHECK(count_cx(decompose_2q(Eigen::Matrix4cd::Identity(), 0, 1)) == 0);
    for (int i = 0; i < 20; ++i) {
        Eigen::Matrix2cd a, b;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                a(r, c) = cxd{rng.normal(), rng.normal()};
                b(r, c) = cxd{rng.normal(), rng.normal()};
            }
        a = Eigen::HouseholderQR<Eigen::Matrix2cd>(a).householderQ();
        b = Eigen::HouseholderQR<Eigen::Matrix2cd>(b).householderQ();
        Eigen::Matrix4cd prod;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) prod.block<2, 2>(2 * r, 2 * c) = a(r, c) * b;
        auto seq = decompose_2q(prod, 0, 1);
        CHECK(count_cx(seq) == 0);
        CHECK(phase_insensitive_distance(prod, seq_unitary(2, seq)) < 1e-8);
    }
}
