#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbench/benchmarks.hpp"
#include "qbench/quantum_volume.hpp"
#include "qbench/report.hpp"
#include "qbench/runner.hpp"

namespace {

using namespace qbench;

std::optional<NoiseModel> parse_noise(const std::string& text) {
    if (text == "none" || text.empty()) return std::nullopt;
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--noise", "expected 'p1,p2' or 'none'");
    const double p1 = std::stod(text.substr(0, comma));
    const double p2 = std::stod(text.substr(comma + 1));
    if (p1 < 0 || p1 > 1 || p2 < 0 || p2 > 1)
        throw CLI::ValidationError("--noise", "rates must lie in [0, 1]");
    return NoiseModel{p1, p2};
}

std::vector<BenchmarkId> parse_benchmarks(const std::string& text) {
    if (text.empty() || text == "all") return all_benchmarks();
    std::vector<BenchmarkId> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto id = benchmark_from_name(item);
        if (!id) throw CLI::ValidationError("--benchmarks", "unknown benchmark: " + item);
        out.push_back(*id);
    }
    if (out.empty()) throw CLI::ValidationError("--benchmarks", "empty benchmark list");
    return out;
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

int cmd_run(CLI::App& app, const std::string& benchmarks_arg, const std::string& noise_arg,
            RunConfig cfg, const std::string& config_path, const std::string& out_path,
            const std::string& report_dir, std::uint64_t qv_background) {
    if (!config_path.empty()) {
        RunConfig from_file = run_config_from_json(load_config_file(config_path));
        // CLI flags override the config file
        if (!app.count("--benchmarks")) cfg.benchmarks = from_file.benchmarks;
        if (!app.count("--min-size")) cfg.min_size = from_file.min_size;
        if (!app.count("--max-size")) cfg.max_size = from_file.max_size;
        if (!app.count("--num-circuits")) cfg.num_circuits = from_file.num_circuits;
        if (!app.count("--num-params")) cfg.num_params = from_file.num_params;
        if (!app.count("--shots")) cfg.shots = from_file.shots;
        if (!app.count("--noise")) cfg.noise = from_file.noise;
        if (!app.count("--seed")) cfg.master_seed = from_file.master_seed;
        if (!app.count("--width-limit")) cfg.width_limit = from_file.width_limit;
    }
    if (app.count("--benchmarks")) cfg.benchmarks = parse_benchmarks(benchmarks_arg);
    if (app.count("--noise") || config_path.empty()) cfg.noise = parse_noise(noise_arg);

    SuiteResult result = run_suite(cfg);
    save_results(result, out_path);
    std::size_t failures = 0;
    for (const auto& rec : result.records) failures += !rec.ok;
    std::printf("wrote %s: %zu records (%zu failed), %zu groups\n", out_path.c_str(),
                result.records.size(), failures, result.groups.size());
    for (const auto& note : result.notes) std::printf("note: %s\n", note.c_str());

    if (!report_dir.empty()) {
        std::optional<Background> bg;
        if (qv_background >= 2)
            bg = Background{qv_background, qv_region_depth_estimate(qv_background)};
        for (const auto& f : render_report(result, bg, report_dir))
            std::printf("wrote %s\n", f.c_str());
    }
    return 0;
}

int cmd_qv(const std::string& noise_arg, std::uint32_t max_n, std::uint32_t circuits,
           std::uint64_t shots, std::uint64_t seed, const std::string& out_path) {
    const auto noise = parse_noise(noise_arg).value_or(NoiseModel::none());
    QvResult qv = measure_qv(noise, max_n, circuits, shots, seed, true);
    std::printf("quantum volume: %llu\n", static_cast<unsigned long long>(qv.qv));
    for (const auto& row : qv.per_n)
        std::printf("  n=%u mean_hop=%.4f stderr=%.4f depth=%.1f %s\n", row.n, row.mean_hop,
                    row.stderr_hop, row.mean_normalized_depth, row.pass ? "pass" : "fail");
    if (!out_path.empty()) {
        SuiteResult shell;
        shell.qv = qv;
        save_results(shell, out_path);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& out_dir, std::uint64_t qv_flag) {
    SuiteResult result = load_results(in_path);
    std::optional<Background> bg;
    if (qv_flag >= 2) {
        bg = Background{qv_flag, qv_region_depth_estimate(qv_flag)};
    } else if (result.qv && result.qv->qv >= 2) {
        bg = Background{result.qv->qv, result.qv->passing_depth()};
    }
    for (const auto& f : render_report(result, bg, out_dir)) std::printf("wrote %s\n", f.c_str());
    return 0;
}

int cmd_list() {
    std::printf("%-8s %-11s %s\n", "name", "category", "sizes");
    for (auto id : all_benchmarks()) {
        std::string sizes = "n >= " + std::to_string(min_size(id));
        if (id == BenchmarkId::HS || id == BenchmarkId::VQE1) sizes += " (even)";
        std::printf("%-8s %-11s %s\n", benchmark_name(id), benchmark_category(id), sizes.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"application-oriented quantum benchmark suite on a noisy simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute the benchmark suite and write a results file");
    std::string benchmarks_arg = "all", noise_arg = "0.003,0.03", config_path,
                out_path = "results.json", report_dir;
    std::uint64_t qv_background = 0;
    RunConfig cfg;
    run->add_option("--benchmarks", benchmarks_arg, "comma-separated benchmark names or 'all'");
    run->add_option("--min-size", cfg.min_size, "smallest problem size (default 2)");
    run->add_option("--max-size", cfg.max_size, "largest problem size (default 12)");
    run->add_option("--num-circuits", cfg.num_circuits, "circuits per size (default 3)");
    run->add_option("--num-params", cfg.num_params, "parameter bindings per circuit (default 1)");
    run->add_option("--shots", cfg.shots, "shots per circuit (default 1000)");
    run->add_option("--noise", noise_arg, "depolarizing rates 'p1,p2' or 'none' (default 0.003,0.03)");
    run->add_option("--seed", cfg.master_seed, "master seed (default 0)");
    run->add_option("--width-limit", cfg.width_limit, "simulator width limit (default 24)");
    run->add_option("--config", config_path, "JSON config file; explicit flags take precedence");
    run->add_option("--out", out_path, "results file path (default results.json)");
    run->add_option("--report-dir", report_dir, "also render the report into this directory");
    run->add_option("--qv", qv_background, "quantum volume for the report background");

    auto* qv = app.add_subcommand("qv", "measure the quantum volume of a noise model");
    std::string qv_noise = "0.003,0.03", qv_out;
    std::uint32_t qv_max_n = 8, qv_circuits = 200;
    std::uint64_t qv_shots = 1000, qv_seed = 0;
    qv->add_option("--noise", qv_noise, "depolarizing rates 'p1,p2' or 'none'");
    qv->add_option("--max-n", qv_max_n, "largest width to sweep (default 8)");
    qv->add_option("--circuits", qv_circuits, "circuits per width (default 200, minimum 50)");
    qv->add_option("--shots", qv_shots, "shots per circuit (default 1000)");
    qv->add_option("--seed", qv_seed, "seed (default 0)");
    qv->add_option("--out", qv_out, "optional results file for the QV record");

    auto* rep = app.add_subcommand("report", "re-render charts from a results file");
    std::string rep_in = "results.json", rep_out = "report";
    std::uint64_t rep_qv = 0;
    rep->add_option("--in", rep_in, "results file (default results.json)");
    rep->add_option("--out-dir", rep_out, "output directory (default report)");
    rep->add_option("--qv", rep_qv, "background quantum volume (default: from the results file)");

    auto* list = app.add_subcommand("list", "enumerate the benchmarks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(*run, benchmarks_arg, noise_arg, cfg, config_path, out_path, report_dir,
                           qv_background);
        if (qv->parsed()) return cmd_qv(qv_noise, qv_max_n, qv_circuits, qv_shots, qv_seed, qv_out);
        if (rep->parsed()) return cmd_report(rep_in, rep_out, rep_qv);
        if (list->parsed()) return cmd_list();
    } catch (const qbench::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
