#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "qbench/simulator.hpp"

namespace qbench {

/// Classical (Hellinger) fidelity (sum_x sqrt(p(x) q(x)))^2. Symmetric,
/// bounded in [0, 1], equal to 1 iff the distributions coincide.
inline double classical_fidelity(const Distribution& p, const Distribution& q) {
    if (p.width() != q.width()) throw WidthMismatch("classical_fidelity: width mismatch");
    double s = 0.0;
    for (auto& [k, v] : p.probs()) {
        const double w = q.prob(k);
        if (w > 0.0) s += std::sqrt(v * w);
    }
    const double f = s * s;
    return std::min(f, 1.0);
}

struct FidelityReport {
    double f_s = 0.0;         // classical fidelity vs the ideal distribution
    double f_uni = 0.0;       // classical fidelity between ideal and uniform
    double f_raw = 0.0;       // (f_s - f_uni) / (1 - f_uni), may be negative
    double f_normalized = 0.0; // max(f_raw, 0)
};

/// F_s(ideal, uniform) without materializing the uniform distribution:
/// (sum_x sqrt(ideal(x)))^2 / 2^n.
inline double uniform_reference_fidelity(const Distribution& ideal) {
    double s = 0.0;
    for (auto& [k, v] : ideal.probs()) s += std::sqrt(v);
    return std::min(s * s / static_cast<double>(std::uint64_t{1} << ideal.width()), 1.0);
}

/// Normalized result fidelity: rescales classical fidelity so that a uniform
/// output scores 0, clamped at zero (the raw value is kept for diagnostics).
inline FidelityReport normalized_fidelity(const Distribution& ideal, const Distribution& output) {
    if (ideal.width() != output.width()) throw WidthMismatch("normalized_fidelity: width mismatch");
    FidelityReport r;
    r.f_uni = uniform_reference_fidelity(ideal);
    if (r.f_uni > 1.0 - 1e-12)
        throw DegenerateIdeal("ideal distribution too close to uniform for normalized fidelity");
    r.f_s = classical_fidelity(ideal, output);
    r.f_raw = (r.f_s - r.f_uni) / (1.0 - r.f_uni);
    r.f_normalized = std::max(r.f_raw, 0.0);
    return r;
}

/// Output-measure of the heavy set: strings whose ideal probability strictly
/// exceeds the lower median over all 2^n ideal probabilities. With a uniform
/// ideal the heavy set is empty and the result is 0.
inline double heavy_output_probability(const Distribution& ideal, const Distribution& output) {
    if (ideal.width() != output.width()) throw WidthMismatch("heavy_output_probability: width mismatch");
    if (ideal.width() > 20) throw WidthLimitExceeded("heavy_output_probability supports width <= 20");
    const std::uint64_t total = std::uint64_t{1} << ideal.width();
    std::vector<double> probs(total, 0.0);
    for (auto& [k, v] : ideal.probs()) probs[k] = v;
    std::vector<double> sorted = probs;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[total / 2 - 1]; // lower median
    double hop = 0.0;
    for (auto& [k, v] : output.probs())
        if (probs[k] > median) hop += v;
    return hop;
}

/// Analytic phase-estimation outcome distribution over b in [0, 2^t) for a
/// register of t counting qubits estimating phase phi in [0, 1):
///   |alpha_b|^2 = |(1/2^t) (1 - e^{2 pi i (2^t phi - b)}) / (1 - e^{2 pi i (phi - b/2^t)})|^2.
/// Exactly representable phases (2^t phi integral) give a delta.
inline Distribution pe_outcome_distribution(std::uint32_t t, double phi) {
    if (t < 1) throw Error("pe_outcome_distribution: t must be >= 1");
    const std::uint64_t dim = std::uint64_t{1} << t;
    const double scaled = phi * static_cast<double>(dim);
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) < 1e-12) {
        const std::uint64_t b0 =
            (static_cast<std::uint64_t>(std::llround(rounded)) % dim + dim) % dim;
        return Distribution::delta(t, b0);
    }
    Distribution d(t);
    const double two_pi = 6.283185307179586476925286766559;
    for (std::uint64_t b = 0; b < dim; ++b) {
        const cxd num = 1.0 - std::polar(1.0, two_pi * (scaled - static_cast<double>(b)));
        const cxd den = 1.0 - std::polar(1.0, two_pi * (phi - static_cast<double>(b) / dim));
        const double a = std::abs(num / den) / static_cast<double>(dim);
        d.set(b, a * a);
    }
    return d;
}

} // namespace qbench
