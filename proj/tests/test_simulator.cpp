#include <doctest.h>

#include <cmath>

#include "qbench/circuit.hpp"
#include "qbench/metrics.hpp"
#include "qbench/rng.hpp"
#include "qbench/simulator.hpp"
#include "qbench/transpile.hpp"

using namespace qbench;

TEST_CASE("ideal: h then measure gives a fair coin") {
    Circuit c(1, 1);
    c.h(0).measure(0, 0);
    auto d = ideal_probabilities(c);
    CHECK(d.prob(0) == doctest::Approx(0.5));
    CHECK(d.prob(1) == doctest::Approx(0.5));
}

TEST_CASE("ideal: identity circuit is a delta at zero") {
    Circuit c(3, 3);
    for (std::uint32_t q = 0; q < 3; ++q) c.measure(q, q);
    auto d = ideal_probabilities(c);
    CHECK(d.prob(0) == doctest::Approx(1.0));
    CHECK(d.support_size() == 1);
}

TEST_CASE("ideal: distribution normalizes") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Circuit c(3, 3);
        for (int i = 0; i < 12; ++i) {
            const auto q = static_cast<std::uint32_t>(rng.uniform_int(3));
            auto q2 = static_cast<std::uint32_t>(rng.uniform_int(3));
            if (q2 == q) q2 = (q + 1) % 3;
            if (rng.uniform() < 0.5)
                c.h(q);
            else
                c.cp(rng.uniform(-kPi, kPi), q, q2);
        }
        for (std::uint32_t q = 0; q < 3; ++q) c.measure(q, q);
        CHECK(ideal_probabilities(c).total() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("ideal: mid-circuit measurement branches correctly") {
    // Measure a |+> qubit, then flip the second qubit conditioned on the
    // result: outcomes 00 and 11 equally likely (bit0 = measured, bit1 = flip).
    Circuit c(2, 2);
    c.h(0).measure(0, 0);
    c.x(1).if_bit(0, 1);
    c.measure(1, 1);
    auto d = ideal_probabilities(c);
    CHECK(d.prob(0b00) == doctest::Approx(0.5));
    CHECK(d.prob(0b11) == doctest::Approx(0.5));
}

TEST_CASE("ideal: reset reuses a qubit") {
    Circuit c(1, 2);
    c.h(0).measure(0, 0);
    c.reset(0);
    c.measure(0, 1); // after reset, always 0
    auto d = ideal_probabilities(c);
    CHECK(d.prob(0b00) == doctest::Approx(0.5));
    CHECK(d.prob(0b01) == doctest::Approx(0.5));
    CHECK(d.prob(0b10) == doctest::Approx(0.0));
}

TEST_CASE("ideal: width limit enforced") {
    Circuit c(25);
    CHECK_THROWS_AS(ideal_probabilities(c), WidthLimitExceeded);
}

TEST_CASE("noisy sampler: zero noise on a deterministic circuit") {
    Circuit c(3, 3);
    c.x(0).x(2);
    for (std::uint32_t q = 0; q < 3; ++q) c.measure(q, q);
    auto [d, timing] = sample_noisy(c, NoiseModel::none(), 1000, 42);
    CHECK(d.prob(0b101) == doctest::Approx(1.0));
    CHECK(d.shots() == 1000);
    CHECK(timing.shots == 1000);
    CHECK(timing.t_quantum >= 0.0);
}

TEST_CASE("noisy sampler: zero-noise empirical converges to ideal (TV bound)") {
    Rng rng(17);
    for (std::uint32_t n = 2; n <= 4; ++n) {
        Circuit c(n, n);
        for (std::uint32_t q = 0; q < n; ++q) c.h(q);
        for (std::uint32_t q = 0; q + 1 < n; ++q) c.cp(rng.uniform(0.3, 2.0), q, q + 1);
        for (std::uint32_t q = 0; q < n; ++q) c.rx(rng.uniform(-1.0, 1.0), q);
        for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
        auto ideal = ideal_probabilities(c);
        auto [emp, t] = sample_noisy(c, NoiseModel::none(), 100000, 7);
        const double bound = 4.0 * std::sqrt(static_cast<double>(std::uint64_t{1} << n) / 100000.0);
        CHECK(total_variation(ideal, emp) <= bound);
    }
}

TEST_CASE("noisy sampler: x gate with p1 = 1 matches the channel mixture") {
    // X|0> = |1>, then a uniformly random non-identity Pauli: X,Y send it to
    // |0>, Z keeps |1>; P(1) = 1/3.
    Circuit c(1, 1);
    c.x(0).measure(0, 0);
    auto [d, t] = sample_noisy(c, NoiseModel{1.0, 0.0}, 100000, 5);
    CHECK(d.prob(1) == doctest::Approx(1.0 / 3.0).epsilon(0.02));
    auto dm = density_oracle(c, NoiseModel{1.0, 0.0});
    CHECK(dm.prob(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("noisy sampler: determinism for fixed seed") {
    Circuit c(2, 2);
    c.h(0).cx(0, 1).measure(0, 0).measure(1, 1);
    auto [a, t1] = sample_noisy(c, NoiseModel{0.01, 0.05}, 5000, 99);
    auto [b, t2] = sample_noisy(c, NoiseModel{0.01, 0.05}, 5000, 99);
    CHECK(a.probs() == b.probs());
    auto [c2, t3] = sample_noisy(c, NoiseModel{0.01, 0.05}, 5000, 100);
    CHECK(a.probs() != c2.probs());
}

TEST_CASE("noisy sampler: mid-circuit path with conditions is deterministic") {
    Circuit c(2, 3);
    c.h(0).measure(0, 0);
    c.x(1).if_bit(0, 1);
    c.reset(0);
    c.h(0).measure(0, 1);
    c.measure(1, 2);
    auto [a, t1] = sample_noisy(c, NoiseModel{0.02, 0.0}, 2000, 11);
    auto [b, t2] = sample_noisy(c, NoiseModel{0.02, 0.0}, 2000, 11);
    CHECK(a.probs() == b.probs());
    CHECK(a.shots() == 2000);
}

TEST_CASE("density oracle: zero noise equals ideal probabilities") {
    Circuit c(3, 3);
    c.h(0).cx(0, 1).cp(0.7, 1, 2).rx(0.3, 2);
    for (std::uint32_t q = 0; q < 3; ++q) c.measure(q, q);
    auto ideal = ideal_probabilities(c);
    auto dm = density_oracle(c, NoiseModel::none());
    CHECK(total_variation(ideal, dm) < 1e-10);
}

TEST_CASE("density oracle: single gate closed-form mixture") {
    // h on |0> with depolarizing p: every branch has P(0) = 1/2 exactly.
    const double p = 0.3;
    Circuit c(1, 1);
    c.h(0).measure(0, 0);
    auto dm = density_oracle(c, NoiseModel{p, 0.0});
    CHECK(dm.prob(0) == doctest::Approx(0.5).epsilon(1e-12));

    // x on |0>: P(1) = 1 - 2p/3 from the channel definition.
    Circuit c2(1, 1);
    c2.x(0).measure(0, 0);
    auto dm2 = density_oracle(c2, NoiseModel{p, 0.0});
    CHECK(dm2.prob(1) == doctest::Approx(1.0 - 2.0 * p / 3.0).epsilon(1e-12));
}

TEST_CASE("density oracle vs trajectory sampling: GHZ with two-qubit noise") {
    Circuit c(3, 3);
    c.h(0).cx(0, 1).cx(1, 2);
    for (std::uint32_t q = 0; q < 3; ++q) c.measure(q, q);
    const NoiseModel noise{0.0, 0.1};
    auto dm = density_oracle(c, noise);
    const std::uint64_t shots = 1000000;
    auto [emp, t] = sample_noisy(c, noise, shots, 31337);
    for (std::uint64_t x = 0; x < 8; ++x) {
        const double pexp = dm.prob(x);
        const double sigma = std::sqrt(pexp * (1.0 - pexp) / static_cast<double>(shots));
        CHECK(std::abs(emp.prob(x) - pexp) <= 3.0 * sigma + 1e-9);
    }
}

TEST_CASE("density oracle rejects unsupported circuits") {
    Circuit wide(7);
    CHECK_THROWS_AS(density_oracle(wide, NoiseModel::none()), WidthLimitExceeded);
    Circuit mid(2, 2);
    mid.measure(0, 0);
    mid.h(1);
    CHECK_THROWS_AS(density_oracle(mid, NoiseModel::none()), Error);
}

TEST_CASE("empirical distributions normalize exactly") {
    Rng rng(8);
    Circuit c(4, 4);
    for (int i = 0; i < 30; ++i) {
        const auto q = static_cast<std::uint32_t>(rng.uniform_int(4));
        auto q2 = static_cast<std::uint32_t>(rng.uniform_int(4));
        if (q2 == q) q2 = (q + 1) % 4;
        if (rng.uniform() < 0.5)
            c.ry(rng.uniform(-2.0, 2.0), q);
        else
            c.cx(q, q2);
    }
    for (std::uint32_t q = 0; q < 4; ++q) c.measure(q, q);
    auto [d, t] = sample_noisy(c, NoiseModel{0.05, 0.1}, 20000, 3);
    CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("noisy sampler matches density oracle on a random regression set") {
    Rng rng(505);
    for (int trial = 0; trial < 6; ++trial) {
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.uniform_int(3));
        Circuit c(n, n);
        for (int i = 0; i < 10; ++i) {
            const auto q = static_cast<std::uint32_t>(rng.uniform_int(n));
            auto q2 = static_cast<std::uint32_t>(rng.uniform_int(n));
            if (q2 == q) q2 = (q + 1) % n;
            switch (rng.uniform_int(4)) {
            case 0: c.h(q); break;
            case 1: c.rx(rng.uniform(-2.0, 2.0), q); break;
            case 2: c.cx(q, q2); break;
            default: c.cz(q, q2); break;
            }
        }
        for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
        const NoiseModel noise{0.01, 0.05};
        auto dm = density_oracle(c, noise);
        const std::uint64_t shots = 200000;
        auto [emp, t] = sample_noisy(c, noise, shots, 1000 + trial);
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
            const double pexp = dm.prob(x);
            const double sigma = std::sqrt(pexp * (1.0 - pexp) / static_cast<double>(shots));
            CHECK(std::abs(emp.prob(x) - pexp) <= 4.0 * sigma + 1e-6);
        }
    }
}

TEST_CASE("noisy sampler: bv1-style circuit lands in the expected fidelity band") {
    // width 5, secret 13, rates (0.003, 0.03): normalized fidelity well
    // inside (0.7, 1.0) after standard-basis transpilation
    Circuit c(5, 4);
    c.x(4).h(4);
    for (std::uint32_t q = 0; q < 4; ++q) c.h(q);
    for (std::uint32_t q : {0u, 2u, 3u}) c.cx(q, 4);
    for (std::uint32_t q = 0; q < 4; ++q) c.h(q);
    for (std::uint32_t q = 0; q < 4; ++q) c.measure(q, q);
    Circuit t = transpile_standard(c);
    auto ideal = Distribution::delta(4, 13);
    auto [output, timing] = sample_noisy(t, NoiseModel{0.003, 0.03}, 1000, 12);
    const double f = normalized_fidelity(ideal, output).f_normalized;
    CHECK(f > 0.7);
    CHECK(f < 1.0);
}

TEST_CASE("distribution keys render most-significant-bit first") {
    Distribution d(4);
    CHECK(d.key_string(0b0001) == "0001"); // classical bit 0 is the rightmost character
    CHECK(d.key_string(0b1000) == "1000");
    CHECK(d.key_string(13) == "1101");
}
