#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include <Eigen/Dense>

#include "qbench/circuit.hpp"
#include "qbench/metrics.hpp"
#include "qbench/rng.hpp"
#include "qbench/simulator.hpp"
#include "qbench/transpile.hpp"

namespace qbench {

/// Haar-random SU(4) via Ginibre + QR with the standard phase fix.
inline Eigen::Matrix4cd haar_su4(Rng& rng) {
    Eigen::Matrix4cd g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = cxd{rng.normal(), rng.normal()};
    Eigen::HouseholderQR<Eigen::Matrix4cd> qr(g);
    Eigen::Matrix4cd q = qr.householderQ();
    const Eigen::Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < 4; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
    q /= std::pow(q.determinant(), 0.25);
    return q;
}

/// Quantum volume model circuit: n layers, each applying an independent
/// Haar-random SU(4) to every pair of a fresh uniformly random perfect
/// matching on floor(n/2) pairs (one qubit idles when n is odd).
inline Circuit qv_circuit(std::uint32_t n, Rng& rng) {
    if (n < 2) throw Error("qv_circuit: n must be >= 2");
    Circuit c(n, n, "qv");
    std::vector<std::uint32_t> perm(n);
    for (std::uint32_t layer = 0; layer < n; ++layer) {
        for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
        for (std::uint32_t i = n; i-- > 1;)
            std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
        for (std::uint32_t k = 0; k + 1 < n; k += 2)
            c.u2q(haar_su4(rng), perm[k], perm[k + 1]);
    }
    for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
    return c;
}

struct QvPerWidth {
    std::uint32_t n = 0;
    double mean_hop = 0.0;
    double stderr_hop = 0.0;
    std::uint32_t circuits = 0;
    bool pass = false;
    double mean_normalized_depth = 0.0;
};

struct QvResult {
    std::uint64_t qv = 1; // 2^(largest consecutive passing n), 1 if none pass
    std::vector<QvPerWidth> per_n;

    /// Mean normalized depth of the largest passing quantum volume circuits
    /// (used for the quantum volume region in volumetric plots).
    double passing_depth() const {
        double d = 0.0;
        for (const auto& row : per_n)
            if (row.pass) d = row.mean_normalized_depth;
        return d;
    }
};

/// Quantum volume protocol: for n = 2.. upward, transpile each model circuit
/// to the standard basis, sample it under the noise model, and score heavy
/// outputs against the noiseless ideal of the untranspiled circuit. A width
/// passes if mean HOP - 2 stderr > 2/3; the first failure stops the sweep.
inline QvResult measure_qv(const NoiseModel& noise, std::uint32_t n_max,
                           std::uint32_t circuits_per_n, std::uint64_t shots, std::uint64_t seed,
                           bool log_progress = false) {
    if (circuits_per_n < 50) throw Error("measure_qv: need at least 50 circuits per width");
    QvResult result;
    for (std::uint32_t n = 2; n <= n_max; ++n) {
        std::vector<double> hops;
        hops.reserve(circuits_per_n);
        double depth_sum = 0.0;
        for (std::uint32_t idx = 0; idx < circuits_per_n; ++idx) {
            Rng rng(derive_seed(seed, 0x51u, n, idx, 0));
            Circuit model = qv_circuit(n, rng);
            auto ideal = ideal_probabilities(model);
            Circuit standard = transpile_standard(model);
            depth_sum += depth(standard);
            auto [output, timing] =
                sample_noisy(standard, noise, shots, derive_seed(seed, 0x51u, n, idx, 1));
            hops.push_back(heavy_output_probability(ideal, output));
        }
        QvPerWidth row;
        row.n = n;
        row.circuits = circuits_per_n;
        row.mean_normalized_depth = depth_sum / circuits_per_n;
        double mean = 0.0;
        for (double h : hops) mean += h;
        mean /= hops.size();
        double var = 0.0;
        for (double h : hops) var += (h - mean) * (h - mean);
        var /= (hops.size() - 1);
        row.mean_hop = mean;
        row.stderr_hop = std::sqrt(var / hops.size());
        row.pass = mean - 2.0 * row.stderr_hop > 2.0 / 3.0;
        result.per_n.push_back(row);
        if (log_progress)
            std::fprintf(stderr, "qv: n=%u mean_hop=%.4f stderr=%.4f %s\n", n, row.mean_hop,
                         row.stderr_hop, row.pass ? "pass" : "fail");
        if (!row.pass) break;
        result.qv = std::uint64_t{1} << n;
    }
    return result;
}

} // namespace qbench
