#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbench/benchmarks.hpp"
#include "qbench/metrics.hpp"
#include "qbench/quantum_volume.hpp"
#include "qbench/rng.hpp"
#include "qbench/simulator.hpp"
#include "qbench/transpile.hpp"

namespace qbench {

struct RunConfig {
    std::vector<BenchmarkId> benchmarks = all_benchmarks();
    std::uint32_t min_size = 2;
    std::uint32_t max_size = 12;
    std::uint32_t num_circuits = 3;
    std::uint32_t num_params = 1; // > 1 only meaningful for parameterized families
    std::uint64_t shots = 1000;
    std::optional<NoiseModel> noise; // nullopt = noiseless
    std::uint64_t master_seed = 0;
    std::uint32_t width_limit = kDefaultWidthLimit;
};

struct BenchmarkRecord {
    BenchmarkId benchmark = BenchmarkId::DJ;
    std::uint32_t size = 0;
    std::uint32_t circuit_idx = 0;
    std::uint32_t param_idx = 0;
    std::uint32_t width = 0;
    int algorithmic_depth = 0;
    int normalized_depth = 0;
    FidelityReport fidelity;
    ExecTiming timing;
    std::string instance_summary;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
};

struct GroupAggregate {
    BenchmarkId benchmark = BenchmarkId::DJ;
    std::uint32_t size = 0;
    std::uint32_t width = 0;
    std::uint32_t count = 0;
    double mean_fidelity = 0.0;
    double mean_algorithmic_depth = 0.0;
    double mean_normalized_depth = 0.0;
    double mean_t_create = 0.0;
    double mean_t_compile = 0.0;
    double mean_t_quantum = 0.0;
};

struct SuiteResult {
    RunConfig config;
    std::vector<BenchmarkRecord> records;
    std::vector<GroupAggregate> groups;
    std::optional<QvResult> qv;
    std::vector<std::string> notes;
};

namespace runner_detail {

// Sub-stream tags so instance sampling, parameter binding, and execution draw
// from independent derived seeds.
inline constexpr std::uint64_t kStreamInstance = 0xA000;
inline constexpr std::uint64_t kStreamBinding = 0xB000;
inline constexpr std::uint64_t kStreamExec = 0xC000;

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace runner_detail

/// Hook invoked at the top of every circuit iteration, standing in for the
/// classical part of a hybrid workload (the built-in benchmarks do nothing
/// classical beyond construction and compilation).
using ClassicalHook = std::function<void(BenchmarkId, std::uint32_t size, std::uint32_t circuit_idx)>;

/// Executes the three nested benchmark loops (size sweep, circuit loop,
/// parameter loop): build, transpile to the standard basis, run the shots,
/// and score fidelity against the instance's ideal distribution. Fully
/// deterministic given the config; per-circuit failures degrade into error
/// records instead of aborting the suite.
inline SuiteResult run_suite(const RunConfig& config, const ClassicalHook& classical_hook = {}) {
    if (config.min_size > config.max_size) throw Error("run_suite: min_size > max_size");
    if (config.shots < 1) throw Error("run_suite: shots must be >= 1");
    if (config.num_circuits < 1) throw Error("run_suite: num_circuits must be >= 1");
    using namespace runner_detail;

    SuiteResult result;
    result.config = config;
    const NoiseModel noise = config.noise.value_or(NoiseModel::none());

    for (BenchmarkId id : config.benchmarks) {
        const auto bench_tag = static_cast<std::uint64_t>(id);
        bool clipped = false;
        for (std::uint32_t n = config.min_size; n <= config.max_size; ++n) {
            if (!valid_size(id, n)) {
                clipped = true;
                continue;
            }
            if (instance_width(id, n) > config.width_limit) {
                result.notes.push_back(std::string(benchmark_name(id)) + " size " +
                                       std::to_string(n) + " skipped: width " +
                                       std::to_string(instance_width(id, n)) + " over limit");
                continue;
            }
            for (std::uint32_t ci = 0; ci < config.num_circuits; ++ci) {
                if (classical_hook) classical_hook(id, n, ci);
                Rng inst_rng(derive_seed(config.master_seed, bench_tag, n, ci, kStreamInstance));
                ProblemInstance inst;
                Circuit built;
                double t_create = 0.0;
                try {
                    const auto t0 = std::chrono::steady_clock::now();
                    inst = sample_instance(id, n, inst_rng);
                    built = build_circuit(inst);
                    t_create = seconds_since(t0);
                } catch (const Error& e) {
                    BenchmarkRecord rec;
                    rec.benchmark = id;
                    rec.size = n;
                    rec.circuit_idx = ci;
                    rec.ok = false;
                    rec.error = e.what();
                    result.records.push_back(std::move(rec));
                    continue;
                }
                const bool parameterized = !param_symbols(inst).empty();
                const std::uint32_t params = parameterized ? config.num_params : 1;
                for (std::uint32_t pi = 0; pi < params; ++pi) {
                    BenchmarkRecord rec;
                    rec.benchmark = id;
                    rec.size = n;
                    rec.circuit_idx = ci;
                    rec.param_idx = pi;
                    rec.width = built.width();
                    rec.instance_summary = inst.summary();
                    rec.seed = derive_seed(config.master_seed, bench_tag, n, ci, kStreamExec + pi);
                    try {
                        Circuit bound = built;
                        if (parameterized) {
                            Rng param_rng(
                                derive_seed(config.master_seed, bench_tag, n, ci, kStreamBinding + pi));
                            bound = bind_params(built, sample_param_binding(inst, param_rng));
                        }
                        rec.algorithmic_depth = depth(bound);

                        const auto t1 = std::chrono::steady_clock::now();
                        Circuit standard = transpile_standard(bound);
                        rec.timing.t_compile = seconds_since(t1);
                        rec.timing.t_create = t_create;
                        rec.normalized_depth = depth(standard);

                        auto [output, timing] =
                            sample_noisy(standard, noise, config.shots, rec.seed, config.width_limit);
                        rec.timing.t_quantum = timing.t_quantum;
                        rec.timing.shots = timing.shots;

                        auto ideal = post_process(inst, ideal_distribution(inst, bound));
                        rec.fidelity = normalized_fidelity(ideal, post_process(inst, output));
                    } catch (const Error& e) {
                        rec.ok = false;
                        rec.error = e.what();
                    }
                    result.records.push_back(std::move(rec));
                }
            }
        }
        if (clipped)
            result.notes.push_back(std::string(benchmark_name(id)) +
                                   ": sizes outside its valid range were clipped");
    }

    // group aggregates keyed on (benchmark, size)
    for (BenchmarkId id : config.benchmarks) {
        for (std::uint32_t n = config.min_size; n <= config.max_size; ++n) {
            GroupAggregate g;
            g.benchmark = id;
            g.size = n;
            for (const auto& rec : result.records) {
                if (rec.benchmark != id || rec.size != n || !rec.ok) continue;
                ++g.count;
                g.width = rec.width;
                g.mean_fidelity += rec.fidelity.f_normalized;
                g.mean_algorithmic_depth += rec.algorithmic_depth;
                g.mean_normalized_depth += rec.normalized_depth;
                g.mean_t_create += rec.timing.t_create;
                g.mean_t_compile += rec.timing.t_compile;
                g.mean_t_quantum += rec.timing.t_quantum;
            }
            if (g.count == 0) continue;
            g.mean_fidelity /= g.count;
            g.mean_algorithmic_depth /= g.count;
            g.mean_normalized_depth /= g.count;
            g.mean_t_create /= g.count;
            g.mean_t_compile /= g.count;
            g.mean_t_quantum /= g.count;
            result.groups.push_back(g);
        }
    }
    return result;
}

// --- Results file (schema v1) -------------------------------------------------

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    std::vector<std::string> names;
    for (auto id : c.benchmarks) names.push_back(benchmark_name(id));
    j["benchmarks"] = names;
    j["min_size"] = c.min_size;
    j["max_size"] = c.max_size;
    j["num_circuits"] = c.num_circuits;
    j["num_params"] = c.num_params;
    j["shots"] = c.shots;
    if (c.noise)
        j["noise"] = {{"p1", c.noise->p1}, {"p2", c.noise->p2}};
    else
        j["noise"] = nullptr;
    j["master_seed"] = c.master_seed;
    j["width_limit"] = c.width_limit;
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    if (j.contains("benchmarks")) {
        c.benchmarks.clear();
        for (const auto& name : j.at("benchmarks")) {
            auto id = benchmark_from_name(name.get<std::string>());
            if (!id) throw IoError("unknown benchmark in config: " + name.get<std::string>());
            c.benchmarks.push_back(*id);
        }
    }
    if (j.contains("min_size")) c.min_size = j.at("min_size").get<std::uint32_t>();
    if (j.contains("max_size")) c.max_size = j.at("max_size").get<std::uint32_t>();
    if (j.contains("num_circuits")) c.num_circuits = j.at("num_circuits").get<std::uint32_t>();
    if (j.contains("num_params")) c.num_params = j.at("num_params").get<std::uint32_t>();
    if (j.contains("shots")) c.shots = j.at("shots").get<std::uint64_t>();
    if (j.contains("noise") && !j.at("noise").is_null())
        c.noise = NoiseModel{j.at("noise").at("p1").get<double>(), j.at("noise").at("p2").get<double>()};
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("width_limit")) c.width_limit = j.at("width_limit").get<std::uint32_t>();
    return c;
}

inline nlohmann::json to_json(const QvResult& qv) {
    nlohmann::json j;
    j["qv"] = qv.qv;
    j["per_n"] = nlohmann::json::array();
    for (const auto& row : qv.per_n)
        j["per_n"].push_back({{"n", row.n},
                              {"mean_hop", row.mean_hop},
                              {"stderr_hop", row.stderr_hop},
                              {"circuits", row.circuits},
                              {"pass", row.pass},
                              {"mean_normalized_depth", row.mean_normalized_depth}});
    return j;
}

inline QvResult qv_from_json(const nlohmann::json& j) {
    QvResult qv;
    qv.qv = j.at("qv").get<std::uint64_t>();
    for (const auto& row : j.at("per_n")) {
        QvPerWidth w;
        w.n = row.at("n").get<std::uint32_t>();
        w.mean_hop = row.at("mean_hop").get<double>();
        w.stderr_hop = row.at("stderr_hop").get<double>();
        w.circuits = row.at("circuits").get<std::uint32_t>();
        w.pass = row.at("pass").get<bool>();
        w.mean_normalized_depth = row.at("mean_normalized_depth").get<double>();
        qv.per_n.push_back(w);
    }
    return qv;
}

inline nlohmann::json to_json(const SuiteResult& r) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool"] = "qbench";
    j["config"] = to_json(r.config);
    j["notes"] = r.notes;
    j["timing_note"] =
        "timing fields (t_create, t_compile, t_quantum, mean_t_*) are wall-clock and "
        "non-reproducible metadata";
    j["records"] = nlohmann::json::array();
    for (const auto& rec : r.records) {
        nlohmann::json rj;
        rj["benchmark"] = benchmark_name(rec.benchmark);
        rj["size"] = rec.size;
        rj["circuit"] = rec.circuit_idx;
        rj["param"] = rec.param_idx;
        rj["width"] = rec.width;
        rj["algorithmic_depth"] = rec.algorithmic_depth;
        rj["normalized_depth"] = rec.normalized_depth;
        rj["fidelity"] = {{"f_s", rec.fidelity.f_s},
                          {"f_uni", rec.fidelity.f_uni},
                          {"raw", rec.fidelity.f_raw},
                          {"normalized", rec.fidelity.f_normalized}};
        rj["timing"] = {{"t_create", rec.timing.t_create},
                        {"t_compile", rec.timing.t_compile},
                        {"t_quantum", rec.timing.t_quantum},
                        {"shots", rec.timing.shots}};
        rj["instance"] = rec.instance_summary;
        rj["seed"] = rec.seed;
        rj["status"] = rec.ok ? "ok" : "error";
        if (!rec.ok) rj["error"] = rec.error;
        j["records"].push_back(std::move(rj));
    }
    j["groups"] = nlohmann::json::array();
    for (const auto& g : r.groups) {
        j["groups"].push_back({{"benchmark", benchmark_name(g.benchmark)},
                               {"size", g.size},
                               {"width", g.width},
                               {"count", g.count},
                               {"mean_fidelity", g.mean_fidelity},
                               {"mean_algorithmic_depth", g.mean_algorithmic_depth},
                               {"mean_normalized_depth", g.mean_normalized_depth},
                               {"mean_t_create", g.mean_t_create},
                               {"mean_t_compile", g.mean_t_compile},
                               {"mean_t_quantum", g.mean_t_quantum}});
    }
    if (r.qv) j["qv"] = to_json(*r.qv);
    return j;
}

inline SuiteResult suite_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != 1) throw IoError("unsupported results schema version");
    SuiteResult r;
    r.config = run_config_from_json(j.at("config"));
    for (const auto& note : j.at("notes")) r.notes.push_back(note.get<std::string>());
    for (const auto& rj : j.at("records")) {
        BenchmarkRecord rec;
        auto id = benchmark_from_name(rj.at("benchmark").get<std::string>());
        if (!id) throw IoError("unknown benchmark in results file");
        rec.benchmark = *id;
        rec.size = rj.at("size").get<std::uint32_t>();
        rec.circuit_idx = rj.at("circuit").get<std::uint32_t>();
        rec.param_idx = rj.at("param").get<std::uint32_t>();
        rec.width = rj.at("width").get<std::uint32_t>();
        rec.algorithmic_depth = rj.at("algorithmic_depth").get<int>();
        rec.normalized_depth = rj.at("normalized_depth").get<int>();
        rec.fidelity.f_s = rj.at("fidelity").at("f_s").get<double>();
        rec.fidelity.f_uni = rj.at("fidelity").at("f_uni").get<double>();
        rec.fidelity.f_raw = rj.at("fidelity").at("raw").get<double>();
        rec.fidelity.f_normalized = rj.at("fidelity").at("normalized").get<double>();
        rec.timing.t_create = rj.at("timing").at("t_create").get<double>();
        rec.timing.t_compile = rj.at("timing").at("t_compile").get<double>();
        rec.timing.t_quantum = rj.at("timing").at("t_quantum").get<double>();
        rec.timing.shots = rj.at("timing").at("shots").get<std::uint64_t>();
        rec.instance_summary = rj.at("instance").get<std::string>();
        rec.seed = rj.at("seed").get<std::uint64_t>();
        rec.ok = rj.at("status").get<std::string>() == "ok";
        if (rj.contains("error")) rec.error = rj.at("error").get<std::string>();
        r.records.push_back(std::move(rec));
    }
    for (const auto& gj : j.at("groups")) {
        GroupAggregate g;
        g.benchmark = *benchmark_from_name(gj.at("benchmark").get<std::string>());
        g.size = gj.at("size").get<std::uint32_t>();
        g.width = gj.at("width").get<std::uint32_t>();
        g.count = gj.at("count").get<std::uint32_t>();
        g.mean_fidelity = gj.at("mean_fidelity").get<double>();
        g.mean_algorithmic_depth = gj.at("mean_algorithmic_depth").get<double>();
        g.mean_normalized_depth = gj.at("mean_normalized_depth").get<double>();
        g.mean_t_create = gj.at("mean_t_create").get<double>();
        g.mean_t_compile = gj.at("mean_t_compile").get<double>();
        g.mean_t_quantum = gj.at("mean_t_quantum").get<double>();
        r.groups.push_back(g);
    }
    if (j.contains("qv")) r.qv = qv_from_json(j.at("qv"));
    return r;
}

/// Zeroes the wall-clock timing fields, which the results file marks as
/// non-reproducible; byte comparisons for determinism checks go through this.
inline nlohmann::json strip_nonreproducible(nlohmann::json j) {
    if (j.contains("records"))
        for (auto& rj : j["records"]) {
            rj["timing"]["t_create"] = 0.0;
            rj["timing"]["t_compile"] = 0.0;
            rj["timing"]["t_quantum"] = 0.0;
        }
    if (j.contains("groups"))
        for (auto& gj : j["groups"]) {
            gj["mean_t_create"] = 0.0;
            gj["mean_t_compile"] = 0.0;
            gj["mean_t_quantum"] = 0.0;
        }
    return j;
}

inline void save_results(const SuiteResult& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write results file: " + path);
    out << to_json(r).dump(2) << "\n";
}

inline SuiteResult load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results file: " + path);
    nlohmann::json j;
    in >> j;
    return suite_from_json(j);
}

} // namespace qbench
