#include <doctest.h>

#include <set>

#include <cstdio>

#include "qbench/runner.hpp"

using namespace qbench;

namespace {

RunConfig small_config() {
    RunConfig cfg;
    cfg.benchmarks = {BenchmarkId::BV1, BenchmarkId::QFT2};
    cfg.min_size = 2;
    cfg.max_size = 4;
    cfg.num_circuits = 3;
    cfg.shots = 500;
    cfg.noise = std::nullopt;
    cfg.master_seed = 42;
    return cfg;
}

} // namespace

TEST_CASE("derive_seed: deterministic, sensitive to every field") {
    // frozen golden value for the all-zero tuple
    CHECK(derive_seed(0, 0, 0, 0, 0) == 6026690373104263767ULL);
    CHECK(derive_seed(1, 2, 3, 4, 5) == derive_seed(1, 2, 3, 4, 5));
    // collision census over tuples differing in one field
    Rng rng(6);
    int collisions = 0;
    for (int i = 0; i < 200000; ++i) {
        const std::uint64_t m = rng.next_u64(), b = rng.uniform_int(16), n = rng.uniform_int(16),
                            c = rng.uniform_int(1000), p = rng.uniform_int(8);
        const auto base = derive_seed(m, b, n, c, p);
        if (derive_seed(m + 1, b, n, c, p) == base) ++collisions;
        if (derive_seed(m, b + 1, n, c, p) == base) ++collisions;
        if (derive_seed(m, b, n + 1, c, p) == base) ++collisions;
        if (derive_seed(m, b, n, c + 1, p) == base) ++collisions;
        if (derive_seed(m, b, n, c, p + 1) == base) ++collisions;
    }
    CHECK(collisions == 0);
}

TEST_CASE("run_suite: record count and noiseless fidelities") {
    auto result = run_suite(small_config());
    // 2 benchmarks x 3 sizes x 3 circuits
    CHECK(result.records.size() == 18);
    for (const auto& rec : result.records) {
        REQUIRE(rec.ok);
        CHECK(rec.fidelity.f_normalized == doctest::Approx(1.0));
        CHECK(rec.normalized_depth >= rec.algorithmic_depth);
        CHECK(rec.timing.shots == 500);
    }
    CHECK(result.groups.size() == 6);
}

TEST_CASE("run_suite: group means equal record means exactly") {
    auto result = run_suite(small_config());
    for (const auto& g : result.groups) {
        double sum = 0.0;
        int count = 0;
        for (const auto& rec : result.records) {
            if (rec.benchmark != g.benchmark || rec.size != g.size || !rec.ok) continue;
            sum += rec.fidelity.f_normalized;
            ++count;
        }
        REQUIRE(count == static_cast<int>(g.count));
        CHECK(g.mean_fidelity == doctest::Approx(sum / count).epsilon(1e-15));
    }
}

TEST_CASE("run_suite: invalid sizes are clipped with a note") {
    RunConfig cfg;
    cfg.benchmarks = {BenchmarkId::HS};
    cfg.min_size = 2;
    cfg.max_size = 5;
    cfg.num_circuits = 1;
    cfg.noise = std::nullopt;
    auto result = run_suite(cfg);
    CHECK(result.records.size() == 2); // sizes 2 and 4 only
    REQUIRE(result.notes.size() == 1);
    CHECK(result.notes[0].find("clipped") != std::string::npos);
}

TEST_CASE("run_suite: deterministic results files modulo timing") {
    auto cfg = small_config();
    cfg.noise = NoiseModel{0.003, 0.03};
    auto a = strip_nonreproducible(to_json(run_suite(cfg))).dump(2);
    auto b = strip_nonreproducible(to_json(run_suite(cfg))).dump(2);
    CHECK(a == b);
    cfg.master_seed = 43;
    auto c = strip_nonreproducible(to_json(run_suite(cfg))).dump(2);
    CHECK(a != c);
}

TEST_CASE("results file round trip") {
    auto result = run_suite(small_config());
    const std::string path = "/tmp/qbench_results_test.json";
    save_results(result, path);
    auto back = load_results(path);
    CHECK(to_json(back).dump() == to_json(result).dump());
    std::remove(path.c_str());
}

TEST_CASE("run_suite: vqe1 honors num_params") {
    RunConfig cfg;
    cfg.benchmarks = {BenchmarkId::VQE1};
    cfg.min_size = 4;
    cfg.max_size = 4;
    cfg.num_circuits = 2;
    cfg.num_params = 3;
    cfg.shots = 200;
    cfg.noise = std::nullopt;
    auto result = run_suite(cfg);
    CHECK(result.records.size() == 6); // 2 circuits x 3 bindings
    std::set<std::uint32_t> params_seen;
    for (const auto& rec : result.records) {
        CHECK(rec.ok);
        params_seen.insert(rec.param_idx);
        CHECK(rec.fidelity.f_normalized > 0.9);
    }
    CHECK(params_seen.size() == 3);
}

TEST_CASE("run_suite: per-circuit width-limit failures degrade gracefully") {
    RunConfig cfg;
    cfg.benchmarks = {BenchmarkId::Shor1};
    cfg.min_size = 3;
    cfg.max_size = 4;
    cfg.num_circuits = 1;
    cfg.shots = 100;
    cfg.noise = std::nullopt;
    cfg.width_limit = 14; // shor1 size 4 needs 18 qubits
    auto result = run_suite(cfg);
    REQUIRE(result.records.size() == 1); // size 4 skipped with a note
    CHECK(result.records[0].ok);
    bool noted = false;
    for (const auto& n : result.notes) noted |= n.find("over limit") != std::string::npos;
    CHECK(noted);
}

TEST_CASE("run_suite: classical hook fires once per circuit iteration") {
    RunConfig cfg;
    cfg.benchmarks = {BenchmarkId::BV1};
    cfg.min_size = 2;
    cfg.max_size = 3;
    cfg.num_circuits = 2;
    cfg.shots = 100;
    cfg.noise = std::nullopt;
    int calls = 0;
    run_suite(cfg, [&](BenchmarkId, std::uint32_t, std::uint32_t) { ++calls; });
    CHECK(calls == 4);
}

TEST_CASE("config json round trip and io errors") {
    RunConfig cfg;
    cfg.benchmarks = {BenchmarkId::Grover};
    cfg.noise = NoiseModel{0.001, 0.02};
    cfg.master_seed = 77;
    auto back = run_config_from_json(to_json(cfg));
    CHECK(back.benchmarks == cfg.benchmarks);
    REQUIRE(back.noise.has_value());
    CHECK(back.noise->p1 == doctest::Approx(0.001));
    CHECK(back.noise->p2 == doctest::Approx(0.02));
    CHECK(back.master_seed == 77);
    CHECK_THROWS_AS(load_results("/nonexistent/results.json"), IoError);
    nlohmann::json bad;
    bad["benchmarks"] = {"nope"};
    CHECK_THROWS_AS(run_config_from_json(bad), IoError);
}
