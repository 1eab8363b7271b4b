#include <doctest.h>

#include <cmath>

#include "qbench/circuit.hpp"
#include "qbench/metrics.hpp"
#include "qbench/rng.hpp"
#include "qbench/transpile.hpp"
#include "qbench/simulator.hpp"

using namespace qbench;

namespace {

Distribution random_distribution(std::uint32_t width, Rng& rng) {
    Distribution d(width);
    double total = 0.0;
    std::vector<double> w(std::size_t{1} << width);
    for (auto& v : w) {
        v = rng.uniform();
        total += v;
    }
    for (std::uint64_t x = 0; x < w.size(); ++x) d.set(x, w[x] / total);
    return d;
}

Distribution mix(const Distribution& a, const Distribution& b, double lambda) {
    Distribution d(a.width());
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << a.width()); ++x) {
        const double p = lambda * a.prob(x) + (1.0 - lambda) * b.prob(x);
        if (p > 0.0) d.set(x, p);
    }
    return d;
}

} // namespace

TEST_CASE("classical fidelity: identical deltas give 1, disjoint deltas 0") {
    auto a = Distribution::delta(2, 0);
    auto b = Distribution::delta(2, 1);
    CHECK(classical_fidelity(a, a) == doctest::Approx(1.0));
    CHECK(classical_fidelity(a, b) == doctest::Approx(0.0));
}

TEST_CASE("classical fidelity: worked example 0.75") {
    auto p = Distribution::delta(1, 0);
    Distribution q(1);
    q.set(0, 0.75);
    q.set(1, 0.25);
    CHECK(classical_fidelity(p, q) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("classical fidelity: symmetric, bounded, 1 iff equal") {
    Rng rng(44);
    for (int i = 0; i < 100; ++i) {
        auto p = random_distribution(3, rng);
        auto q = random_distribution(3, rng);
        const double f_pq = classical_fidelity(p, q);
        CHECK(f_pq == doctest::Approx(classical_fidelity(q, p)).epsilon(1e-12));
        CHECK(f_pq >= 0.0);
        CHECK(f_pq <= 1.0);
        CHECK(f_pq < 1.0 - 1e-6); // random pairs differ
        CHECK(classical_fidelity(p, p) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(classical_fidelity(Distribution::delta(1, 0), Distribution::delta(2, 0)),
                    WidthMismatch);
}

TEST_CASE("normalized fidelity: endpoints and the worked value") {
    auto ideal = Distribution::delta(3, 5);
    CHECK(normalized_fidelity(ideal, ideal).f_normalized == doctest::Approx(1.0));
    CHECK(normalized_fidelity(ideal, Distribution::uniform(3)).f_normalized ==
          doctest::Approx(0.0).epsilon(1e-12));

    // n=1, ideal = {0:1}, output = {0:0.75, 1:0.25}: f_s = 0.75, f_uni = 0.5.
    auto i1 = Distribution::delta(1, 0);
    Distribution out(1);
    out.set(0, 0.75);
    out.set(1, 0.25);
    auto rep = normalized_fidelity(i1, out);
    CHECK(rep.f_s == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(rep.f_uni == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.f_normalized == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normalized fidelity: raw value kept, clamp applies at zero") {
    auto ideal = Distribution::delta(1, 0);
    auto anti = Distribution::delta(1, 1);
    auto rep = normalized_fidelity(ideal, anti);
    CHECK(rep.f_raw < 0.0);
    CHECK(rep.f_normalized == 0.0);
}

TEST_CASE("normalized fidelity: degenerate ideal rejected") {
    CHECK_THROWS_AS(normalized_fidelity(Distribution::uniform(2), Distribution::uniform(2)),
                    DegenerateIdeal);
}

TEST_CASE("normalized fidelity: nondecreasing along the ideal-uniform mixture") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto ideal = random_distribution(3, rng);
        const auto uni = Distribution::uniform(3);
        if (uniform_reference_fidelity(ideal) > 0.98) continue;
        double prev = -1.0;
        for (int i = 0; i <= 10; ++i) {
            const double lambda = i / 10.0;
            const double f = normalized_fidelity(ideal, mix(ideal, uni, lambda)).f_normalized;
            CHECK(f >= prev - 1e-9);
            prev = f;
        }
        CHECK(prev == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("heavy output probability: spec examples") {
    SUBCASE("uniform ideal has an empty heavy set") {
        auto uni = Distribution::uniform(2);
        CHECK(heavy_output_probability(uni, uni) == doctest::Approx(0.0));
    }
    Distribution ideal(2);
    ideal.set(0b00, 0.4);
    ideal.set(0b01, 0.3);
    ideal.set(0b10, 0.2);
    ideal.set(0b11, 0.1);
    SUBCASE("output = ideal") {
        CHECK(heavy_output_probability(ideal, ideal) == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("output = uniform") {
        CHECK(heavy_output_probability(ideal, Distribution::uniform(2)) ==
              doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("heavy output probability: ideal scores at least uniform") {
    Rng rng(99);
    for (int i = 0; i < 50; ++i) {
        auto ideal = random_distribution(4, rng);
        const double self = heavy_output_probability(ideal, ideal);
        const double uni = heavy_output_probability(ideal, Distribution::uniform(4));
        CHECK(self >= uni - 1e-12);
    }
}

TEST_CASE("pe outcome distribution: exact phase gives a delta") {
    auto d = pe_outcome_distribution(3, 5.0 / 8.0);
    CHECK(d.prob(5) == doctest::Approx(1.0));
    CHECK(d.support_size() == 1);
}

TEST_CASE("pe outcome distribution: t=1, phi=0.25 is a fair coin") {
    auto d = pe_outcome_distribution(1, 0.25);
    CHECK(d.prob(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.prob(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pe outcome distribution: normalization for random phases") {
    Rng rng(13);
    for (std::uint32_t t = 1; t <= 8; ++t) {
        for (int i = 0; i < 5; ++i) {
            const double phi = rng.uniform();
            CHECK(pe_outcome_distribution(t, phi).total() == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("pe outcome distribution matches a noiseless phase-estimation circuit") {
    // PE of the phase gate p(theta) with theta = 2*pi/3 on t=4 counting
    // qubits; the eigenstate qubit is prepared in |1>.
    const std::uint32_t t = 4;
    const double phi = 1.0 / 3.0;
    Circuit c(t + 1, t);
    c.x(t);
    for (std::uint32_t j = 0; j < t; ++j) c.h(j);
    for (std::uint32_t j = 0; j < t; ++j) {
        // counting qubit j controls U^(2^(t-1-j))
        const double angle = 2.0 * kPi * phi * static_cast<double>(std::uint64_t{1} << (t - 1 - j));
        c.cp(angle, j, t);
    }
    // inverse of the no-swap QFT: reversed gate order, negated angles
    for (std::uint32_t i = 0; i < t; ++i) {
        for (std::uint32_t j = 0; j < i; ++j)
            c.cp(-kPi / static_cast<double>(std::uint64_t{1} << (i - j)), j, i);
        c.h(i);
    }
    for (std::uint32_t j = 0; j < t; ++j) c.measure(j, j);

    auto sim = ideal_probabilities(c);
    auto analytic = pe_outcome_distribution(t, phi);
    CHECK(total_variation(sim, analytic) < 1e-6);
}
