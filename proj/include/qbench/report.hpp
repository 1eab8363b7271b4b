#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qbench/runner.hpp"

namespace qbench {

struct CircuitShape {
    std::uint32_t width = 1;
    int depth = 0;
};

/// One averaged square of the volumetric plot: every record with the same
/// width and depth bucket (10 bins per decade on a log scale) lands here.
struct VolumetricCell {
    std::uint32_t width = 0;
    int depth_bucket = 0;
    double mean_normalized_depth = 0.0;
    double mean_fidelity = 0.0;
    std::uint32_t count = 0;
    std::set<std::string> benchmarks;
};

inline int depth_bucket_index(double normalized_depth) {
    return static_cast<int>(std::lround(10.0 * std::log10(std::max(normalized_depth, 1.0))));
}

/// Buckets records by (width, depth bucket); fidelities of overlapping
/// records are averaged unweighted. Every successful record lands in exactly
/// one cell.
inline std::vector<VolumetricCell> bucket(const std::vector<BenchmarkRecord>& records) {
    std::map<std::pair<std::uint32_t, int>, VolumetricCell> cells;
    for (const auto& rec : records) {
        if (!rec.ok) continue;
        const int b = depth_bucket_index(rec.normalized_depth);
        auto& cell = cells[{rec.width, b}];
        cell.width = rec.width;
        cell.depth_bucket = b;
        cell.mean_normalized_depth += rec.normalized_depth;
        cell.mean_fidelity += rec.fidelity.f_normalized;
        cell.benchmarks.insert(benchmark_name(rec.benchmark));
        ++cell.count;
    }
    std::vector<VolumetricCell> out;
    out.reserve(cells.size());
    for (auto& [key, cell] : cells) {
        cell.mean_normalized_depth /= cell.count;
        cell.mean_fidelity /= cell.count;
        out.push_back(std::move(cell));
    }
    return out;
}

/// Quantum-volume extrapolated success region: a (width, depth) shape is
/// predicted to succeed iff width * depth <= (log2 V_Q)^2. The boundary is
/// inclusive so the passing quantum volume circuits predict their own
/// success.
inline bool background_predict(std::uint64_t vq, const CircuitShape& shape) {
    if (vq < 2 || (vq & (vq - 1)) != 0) throw InvalidQv("quantum volume must be a power of two >= 2");
    const double log2vq = std::log2(static_cast<double>(vq));
    return static_cast<double>(shape.width) * shape.depth <= log2vq * log2vq + 1e-9;
}

/// Volumetric background: the extrapolated success predicate plus the
/// quantum volume region (shapes no larger than the passing QV circuits).
struct Background {
    std::uint64_t vq = 2;
    double qv_region_depth = 0.0; // normalized depth of the passing QV circuits
};

namespace report_detail {

inline std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Fixed fidelity color map: 0 -> #c62828, 0.5 -> #f1c40f, 1 -> #2e7d32,
/// linear in RGB on each half. Documented for golden tests.
inline std::string fidelity_color(double f) {
    f = std::clamp(f, 0.0, 1.0);
    const int lo[3] = {0xc6, 0x28, 0x28};
    const int mid[3] = {0xf1, 0xc4, 0x0f};
    const int hi[3] = {0x2e, 0x7d, 0x32};
    int rgb[3];
    for (int k = 0; k < 3; ++k) {
        if (f < 0.5)
            rgb[k] = static_cast<int>(std::lround(lo[k] + (mid[k] - lo[k]) * (f / 0.5)));
        else
            rgb[k] = static_cast<int>(std::lround(mid[k] + (hi[k] - mid[k]) * ((f - 0.5) / 0.5)));
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

struct SvgWriter {
    std::ostringstream os;

    void open(double w, double h) {
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
           << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n";
        os << "<rect x=\"0\" y=\"0\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
           << "\" fill=\"white\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "", double opacity = 1.0) {
        os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
           << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\"";
        if (!stroke.empty()) os << " stroke=\"" << stroke << "\" stroke-width=\"0.5\"";
        if (opacity != 1.0) os << " fill-opacity=\"" << fmt(opacity) << "\"";
        os << "/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0) {
        os << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
           << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
           << fmt(width) << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, double size = 10.0,
              const std::string& anchor = "middle", const std::string& fill = "#333333") {
        os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << fmt(size)
           << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\"" << fill
           << "\">" << s << "</text>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
        os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) os << ' ';
            os << fmt(pts[i].first) << ',' << fmt(pts[i].second);
        }
        os << "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill) {
        os << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r)
           << "\" fill=\"" << fill << "\"/>\n";
    }
    std::string close() {
        os << "</svg>\n";
        return os.str();
    }
};

} // namespace report_detail

/// Volumetric chart: integer width axis, log-scaled depth axis, grey/white
/// background squares from the QV extrapolation, the quantum volume region,
/// and the averaged benchmark cells on the fidelity color map.
inline std::string render_volumetric_svg(const std::vector<VolumetricCell>& cells,
                                         const std::optional<Background>& background) {
    using namespace report_detail;
    int max_bucket = 10;
    std::uint32_t max_width = 4;
    for (const auto& cell : cells) {
        max_bucket = std::max(max_bucket, cell.depth_bucket + 1);
        max_width = std::max(max_width, cell.width);
    }
    if (background) {
        max_width = std::max<std::uint32_t>(
            max_width, static_cast<std::uint32_t>(std::log2(static_cast<double>(background->vq))));
        max_bucket = std::max(max_bucket, depth_bucket_index(background->qv_region_depth) + 1);
    }
    max_width += 1;

    const double cell_px = 26.0;
    const double left = 70.0, top = 40.0, bottom = 60.0, right = 160.0;
    const double plot_w = cell_px * (max_bucket + 1);
    const double plot_h = cell_px * max_width;
    const double width_px = left + plot_w + right;
    const double height_px = top + plot_h + bottom;

    auto x_of_bucket = [&](int b) { return left + cell_px * b; };
    auto y_of_width = [&](std::uint32_t w) { return top + plot_h - cell_px * w; };

    SvgWriter svg;
    svg.open(width_px, height_px);
    svg.text(left + plot_w / 2, top - 16, "volumetric benchmark results", 13);

    // background success/fail squares
    if (background) {
        for (std::uint32_t w = 1; w <= max_width; ++w) {
            for (int b = 0; b <= max_bucket; ++b) {
                const double d = std::pow(10.0, b / 10.0);
                const bool ok = background_predict(background->vq,
                                                   {w, static_cast<int>(std::lround(d))});
                svg.rect(x_of_bucket(b), y_of_width(w), cell_px - 1.5, cell_px - 1.5,
                         ok ? "#bdbdbd" : "#ffffff", "#e0e0e0");
            }
        }
        // quantum volume region
        const double qv_w = std::log2(static_cast<double>(background->vq));
        const int qv_b = depth_bucket_index(background->qv_region_depth);
        svg.rect(x_of_bucket(0), y_of_width(static_cast<std::uint32_t>(qv_w)),
                 cell_px * (qv_b + 1) - 1.5, cell_px * qv_w - 1.5, "#757575", "#424242", 0.45);
        svg.text(left + plot_w, top - 4,
                 "V_Q = " + std::to_string(background->vq), 10, "end");
    }

    // benchmark cells
    for (const auto& cell : cells) {
        svg.rect(x_of_bucket(cell.depth_bucket), y_of_width(cell.width), cell_px - 1.5,
                 cell_px - 1.5, fidelity_color(cell.mean_fidelity), "#555555");
        char label[16];
        std::snprintf(label, sizeof label, "%.2f", cell.mean_fidelity);
        svg.text(x_of_bucket(cell.depth_bucket) + (cell_px - 1.5) / 2,
                 y_of_width(cell.width) + cell_px / 2 + 3, label, 7.5, "middle", "#101010");
    }

    // axes
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#333333");
    svg.line(left, top, left, top + plot_h, "#333333");
    for (int dec = 0; 10 * dec <= max_bucket; ++dec) {
        const double x = x_of_bucket(10 * dec) + cell_px / 2;
        svg.text(x, top + plot_h + 16, std::to_string(static_cast<int>(std::pow(10.0, dec))), 9);
    }
    svg.text(left + plot_w / 2, top + plot_h + 36, "normalized depth (log scale)", 11);
    for (std::uint32_t w = 1; w <= max_width; ++w)
        if (w % 2 == 0 || w == 1)
            svg.text(left - 8, y_of_width(w) + cell_px / 2 + 3, std::to_string(w), 9, "end");
    svg.text(16, top + plot_h / 2, "width", 11);

    // fidelity legend
    const double lx = left + plot_w + 30;
    for (int i = 0; i < 10; ++i) {
        const double f = (i + 0.5) / 10.0;
        svg.rect(lx, top + plot_h - (i + 1) * (plot_h / 10.0), 16, plot_h / 10.0 - 1,
                 fidelity_color(f));
    }
    svg.text(lx + 24, top + 8, "1.0", 9, "start");
    svg.text(lx + 24, top + plot_h, "0.0", 9, "start");
    svg.text(lx + 8, top - 8, "fidelity", 9);
    return svg.close();
}

/// Per-benchmark line plots mirroring the methodology figure: result
/// fidelity, algorithmic vs normalized depth, and quantum execution time,
/// each against circuit width.
inline std::string render_benchmark_lines_svg(const std::string& name,
                                              const std::vector<GroupAggregate>& groups) {
    using namespace report_detail;
    std::vector<const GroupAggregate*> rows;
    for (const auto& g : groups) rows.push_back(&g);
    std::sort(rows.begin(), rows.end(),
              [](auto* a, auto* b) { return a->width < b->width; });

    const double panel_w = 360, panel_h = 120, left = 60, gap = 34, top = 34;
    const double width_px = left + panel_w + 40;
    const double height_px = top + 3 * panel_h + 2 * gap + 40;
    SvgWriter svg;
    svg.open(width_px, height_px);
    svg.text(left + panel_w / 2, 20, name + " vs circuit width", 13);

    double wmin = 1e300, wmax = -1e300;
    for (auto* g : rows) {
        wmin = std::min(wmin, static_cast<double>(g->width));
        wmax = std::max(wmax, static_cast<double>(g->width));
    }
    if (rows.empty()) {
        wmin = 0;
        wmax = 1;
    }
    if (wmax <= wmin) wmax = wmin + 1;
    auto x_of = [&](double w) { return left + (w - wmin) / (wmax - wmin) * panel_w; };

    struct Series {
        std::string label;
        std::string color;
        std::vector<double> values;
    };
    auto panel = [&](double y0, const std::string& ylabel, std::vector<Series> series,
                     double forced_min, double forced_max) {
        double vmin = forced_min, vmax = forced_max;
        if (vmin >= vmax) {
            vmin = 1e300;
            vmax = -1e300;
            for (const auto& s : series)
                for (double v : s.values) {
                    vmin = std::min(vmin, v);
                    vmax = std::max(vmax, v);
                }
            if (vmin > vmax) {
                vmin = 0;
                vmax = 1;
            }
            if (vmax - vmin < 1e-12) vmax = vmin + 1;
            const double pad = 0.08 * (vmax - vmin);
            vmin -= pad;
            vmax += pad;
        }
        auto y_of = [&](double v) { return y0 + panel_h - (v - vmin) / (vmax - vmin) * panel_h; };
        svg.rect(left, y0, panel_w, panel_h, "#fafafa", "#cccccc");
        for (std::size_t si = 0; si < series.size(); ++si) {
            const auto& s = series[si];
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < rows.size(); ++i)
                pts.push_back({x_of(rows[i]->width), y_of(s.values[i])});
            if (pts.size() > 1) svg.polyline(pts, s.color);
            for (auto& [px, py] : pts) svg.circle(px, py, 2.2, s.color);
            svg.text(left + panel_w + 6, y0 + 12 + 12 * si, s.label, 9, "start", s.color);
        }
        svg.text(left - 8, y0 + 10, fmt(vmax), 8, "end");
        svg.text(left - 8, y0 + panel_h, fmt(vmin), 8, "end");
        svg.text(left - 36, y0 + panel_h / 2, ylabel, 9);
    };

    Series fid{"fidelity", "#2e7d32", {}};
    Series alg{"algorithmic", "#1565c0", {}};
    Series norm{"normalized", "#c62828", {}};
    Series tq{"t_quantum [s]", "#6a1b9a", {}};
    for (auto* g : rows) {
        fid.values.push_back(g->mean_fidelity);
        alg.values.push_back(g->mean_algorithmic_depth);
        norm.values.push_back(g->mean_normalized_depth);
        tq.values.push_back(g->mean_t_quantum);
    }
    panel(top, "fidelity", {fid}, 0.0, 1.0);
    panel(top + panel_h + gap, "depth", {alg, norm}, 1.0, 0.0);
    panel(top + 2 * (panel_h + gap), "time", {tq}, 1.0, 0.0);
    for (auto* g : rows)
        svg.text(x_of(g->width), top + 3 * panel_h + 2 * gap + 14, std::to_string(g->width), 9);
    svg.text(left + panel_w / 2, top + 3 * panel_h + 2 * gap + 30, "circuit width", 11);
    return svg.close();
}

inline std::string cells_csv(const std::vector<VolumetricCell>& cells,
                             const std::vector<GroupAggregate>& groups) {
    using report_detail::fmt;
    std::ostringstream os;
    os << "section,benchmark,size,width,depth_bucket,mean_normalized_depth,mean_fidelity,count\n";
    for (const auto& c : cells) {
        std::string names;
        for (const auto& b : c.benchmarks) {
            if (!names.empty()) names += '+';
            names += b;
        }
        os << "cell," << names << ",," << c.width << ',' << c.depth_bucket << ','
           << fmt(c.mean_normalized_depth) << ',' << fmt(c.mean_fidelity) << ',' << c.count << "\n";
    }
    for (const auto& g : groups)
        os << "group," << benchmark_name(g.benchmark) << ',' << g.size << ',' << g.width << ",,"
           << fmt(g.mean_normalized_depth) << ',' << fmt(g.mean_fidelity) << ',' << g.count << "\n";
    return os.str();
}

/// Synthesizes the quantum volume region depth for a supplied V_Q when no
/// measured QvResult is available: mean normalized depth of a fixed-seed
/// sample of QV circuits at n* = log2 V_Q. Deterministic.
inline double qv_region_depth_estimate(std::uint64_t vq) {
    if (vq < 2 || (vq & (vq - 1)) != 0) throw InvalidQv("quantum volume must be a power of two >= 2");
    const auto n = static_cast<std::uint32_t>(std::log2(static_cast<double>(vq)));
    if (n < 2) return 1.0;
    double sum = 0.0;
    const int samples = 5;
    for (int i = 0; i < samples; ++i) {
        Rng rng(derive_seed(0, 0x5e9, n, static_cast<std::uint64_t>(i), 0));
        sum += depth(transpile_standard(qv_circuit(n, rng)));
    }
    return sum / samples;
}

/// Writes the full report: volumetric SVG, cells/groups CSV, and one line
/// plot per benchmark present in the results.
inline std::vector<std::string> render_report(const SuiteResult& result,
                                              const std::optional<Background>& background,
                                              const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create report directory: " + out_dir);

    std::vector<std::string> written;
    auto write_file = [&](const std::string& name, const std::string& content) {
        const std::string path = out_dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path);
        out << content;
        written.push_back(path);
    };

    const auto cells = bucket(result.records);
    write_file("volumetric.svg", render_volumetric_svg(cells, background));
    write_file("cells.csv", cells_csv(cells, result.groups));

    std::set<BenchmarkId> present;
    for (const auto& g : result.groups) present.insert(g.benchmark);
    for (BenchmarkId id : present) {
        std::vector<GroupAggregate> mine;
        for (const auto& g : result.groups)
            if (g.benchmark == id) mine.push_back(g);
        write_file(std::string(benchmark_name(id)) + "_lines.svg",
                   render_benchmark_lines_svg(benchmark_name(id), mine));
    }
    return written;
}

} // namespace qbench
