#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qbench/circuit.hpp"
#include "qbench/rng.hpp"

namespace qbench {

/// Per-gate depolarizing rates: after every one-qubit (two-qubit) unitary
/// gate a uniformly random non-identity Pauli is inserted on the gate's
/// qubits with probability p1 (p2).
struct NoiseModel {
    double p1 = 0.0;
    double p2 = 0.0;

    bool is_zero() const { return p1 == 0.0 && p2 == 0.0; }
    static NoiseModel none() { return {0.0, 0.0}; }
};

struct ExecTiming {
    double t_create = 0.0;
    double t_compile = 0.0;
    double t_quantum = 0.0;
    std::uint64_t shots = 0;
};

/// Probability map over n-bit outcome strings; either exact (ideal) or
/// empirical (counts / shots). Keys are little-endian integers: bit i of the
/// key is classical bit i. to_string renders MSB first.
class Distribution {
public:
    Distribution() = default;
    explicit Distribution(std::uint32_t width) : width_(width) {}

    static Distribution from_counts(std::uint32_t width, const std::map<std::uint64_t, std::uint64_t>& counts) {
        Distribution d(width);
        std::uint64_t total = 0;
        for (auto& [k, v] : counts) total += v;
        d.shots_ = total;
        for (auto& [k, v] : counts)
            if (v > 0) d.p_[k] = static_cast<double>(v) / static_cast<double>(total);
        return d;
    }

    static Distribution delta(std::uint32_t width, std::uint64_t outcome) {
        Distribution d(width);
        d.p_[outcome] = 1.0;
        return d;
    }

    static Distribution uniform(std::uint32_t width) {
        Distribution d(width);
        const double p = 1.0 / static_cast<double>(std::uint64_t{1} << width);
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << width); ++x) d.p_[x] = p;
        return d;
    }

    std::uint32_t width() const { return width_; }
    std::uint64_t shots() const { return shots_; }
    bool empirical() const { return shots_ > 0; }
    std::size_t support_size() const { return p_.size(); }

    double prob(std::uint64_t outcome) const {
        auto it = p_.find(outcome);
        return it == p_.end() ? 0.0 : it->second;
    }

    void set(std::uint64_t outcome, double p) {
        if (p != 0.0)
            p_[outcome] = p;
        else
            p_.erase(outcome);
    }
    void accumulate(std::uint64_t outcome, double p) {
        if (p != 0.0) p_[outcome] += p;
    }

    const std::map<std::uint64_t, double>& probs() const { return p_; }

    double total() const {
        double s = 0.0;
        for (auto& [k, v] : p_) s += v;
        return s;
    }

    void normalize() {
        const double s = total();
        if (s <= 0.0) return;
        for (auto& [k, v] : p_) v /= s;
    }

    /// Remaps every outcome through f (used e.g. for estimate folding);
    /// colliding outcomes accumulate.
    template <typename F>
    Distribution remapped(std::uint32_t new_width, F&& f) const {
        Distribution d(new_width);
        d.shots_ = shots_;
        for (auto& [k, v] : p_) d.accumulate(f(k), v);
        return d;
    }

    std::string key_string(std::uint64_t outcome) const {
        std::string s(width_, '0');
        for (std::uint32_t i = 0; i < width_; ++i)
            if ((outcome >> i) & 1) s[width_ - 1 - i] = '1';
        return s;
    }

private:
    std::uint32_t width_ = 0;
    std::uint64_t shots_ = 0;
    std::map<std::uint64_t, double> p_;
};

inline double total_variation(const Distribution& a, const Distribution& b) {
    if (a.width() != b.width()) throw WidthMismatch("total_variation: width mismatch");
    double s = 0.0;
    for (auto& [k, v] : a.probs()) s += std::abs(v - b.prob(k));
    for (auto& [k, v] : b.probs())
        if (a.prob(k) == 0.0) s += std::abs(v);
    return 0.5 * s;
}

namespace sim_detail {

struct StateVector {
    std::uint32_t n = 0;
    std::vector<cxd> amp;

    explicit StateVector(std::uint32_t width) : n(width), amp(std::size_t{1} << width, cxd{0.0, 0.0}) {
        amp[0] = 1.0;
    }

    void apply_1q(const cxd m00, const cxd m01, const cxd m10, const cxd m11, std::uint32_t q) {
        const std::size_t stride = std::size_t{1} << q;
        const std::size_t size = amp.size();
        for (std::size_t base = 0; base < size; base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const cxd a0 = amp[i];
                const cxd a1 = amp[i + stride];
                amp[i] = m00 * a0 + m01 * a1;
                amp[i + stride] = m10 * a0 + m11 * a1;
            }
        }
    }

    void apply_phase1q(const cxd f0, const cxd f1, std::uint32_t q) {
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t base = 0; base < amp.size(); base += 2 * stride)
            for (std::size_t i = base; i < base + stride; ++i) {
                amp[i] *= f0;
                amp[i + stride] *= f1;
            }
    }

    void apply_x(std::uint32_t q) {
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t base = 0; base < amp.size(); base += 2 * stride)
            for (std::size_t i = base; i < base + stride; ++i) std::swap(amp[i], amp[i + stride]);
    }

    void apply_cx(std::uint32_t c, std::uint32_t t) {
        const std::size_t cm = std::size_t{1} << c;
        const std::size_t tm = std::size_t{1} << t;
        for (std::size_t i = 0; i < amp.size(); ++i)
            if ((i & cm) && !(i & tm)) std::swap(amp[i], amp[i | tm]);
    }

    void apply_swap(std::uint32_t a, std::uint32_t b) {
        const std::size_t am = std::size_t{1} << a;
        const std::size_t bm = std::size_t{1} << b;
        for (std::size_t i = 0; i < amp.size(); ++i)
            if ((i & am) && !(i & bm)) std::swap(amp[i], (amp[(i ^ am) | bm]));
    }

    /// Phase factor on every index whose bits at `mask` are all ones.
    void apply_controlled_phase(std::size_t mask, cxd factor) {
        for (std::size_t i = 0; i < amp.size(); ++i)
            if ((i & mask) == mask) amp[i] *= factor;
    }

    /// X on target where all control bits are one.
    void apply_controlled_x(std::size_t control_mask, std::uint32_t t) {
        const std::size_t tm = std::size_t{1} << t;
        for (std::size_t i = 0; i < amp.size(); ++i)
            if (((i & control_mask) == control_mask) && !(i & tm)) std::swap(amp[i], amp[i | tm]);
    }

    /// Dense 4x4 on (q0, q1); local index = bit(q0) + 2*bit(q1).
    void apply_2q(const Eigen::Matrix4cd& m, std::uint32_t q0, std::uint32_t q1) {
        const std::size_t m0 = std::size_t{1} << q0;
        const std::size_t m1 = std::size_t{1} << q1;
        for (std::size_t i = 0; i < amp.size(); ++i) {
            if (i & (m0 | m1)) continue;
            const std::size_t i0 = i, i1 = i | m0, i2 = i | m1, i3 = i | m0 | m1;
            const cxd a0 = amp[i0], a1 = amp[i1], a2 = amp[i2], a3 = amp[i3];
            amp[i0] = m(0, 0) * a0 + m(0, 1) * a1 + m(0, 2) * a2 + m(0, 3) * a3;
            amp[i1] = m(1, 0) * a0 + m(1, 1) * a1 + m(1, 2) * a2 + m(1, 3) * a3;
            amp[i2] = m(2, 0) * a0 + m(2, 1) * a1 + m(2, 2) * a2 + m(2, 3) * a3;
            amp[i3] = m(3, 0) * a0 + m(3, 1) * a1 + m(3, 2) * a2 + m(3, 3) * a3;
        }
    }

    double prob_one(std::uint32_t q) const {
        const std::size_t qm = std::size_t{1} << q;
        double p = 0.0;
        for (std::size_t i = 0; i < amp.size(); ++i)
            if (i & qm) p += std::norm(amp[i]);
        return p;
    }

    /// Projects qubit q onto `outcome` and renormalizes by the given norm.
    void collapse(std::uint32_t q, int outcome, double prob_of_outcome) {
        const std::size_t qm = std::size_t{1} << q;
        const double scale = 1.0 / std::sqrt(prob_of_outcome);
        for (std::size_t i = 0; i < amp.size(); ++i) {
            const bool one = (i & qm) != 0;
            if (one == (outcome == 1))
                amp[i] *= scale;
            else
                amp[i] = 0.0;
        }
    }

    double norm2() const {
        double s = 0.0;
        for (const cxd& a : amp) s += std::norm(a);
        return s;
    }
};

inline void apply_pauli(StateVector& sv, int pauli, std::uint32_t q) {
    // 1 = X, 2 = Y, 3 = Z
    switch (pauli) {
    case 1: sv.apply_x(q); break;
    case 2: sv.apply_1q(cxd{0, 0}, cxd{0, -1}, cxd{0, 1}, cxd{0, 0}, q); break;
    case 3: sv.apply_phase1q(cxd{1, 0}, cxd{-1, 0}, q); break;
    default: break;
    }
}

/// Applies one bound unitary gate. Throws UnboundParameter on symbols.
inline void apply_gate(StateVector& sv, const Gate& g) {
    for (const Param& p : g.params)
        if (p.symbolic()) throw UnboundParameter("cannot execute symbolic parameter: " + p.symbol);
    const double half = g.params.empty() ? 0.0 : g.params[0].value * 0.5;
    switch (g.kind) {
    case GateKind::X: sv.apply_x(g.qubits[0]); break;
    case GateKind::H: {
        const double s = 1.0 / std::sqrt(2.0);
        sv.apply_1q(cxd{s, 0}, cxd{s, 0}, cxd{s, 0}, cxd{-s, 0}, g.qubits[0]);
        break;
    }
    case GateKind::RX:
        sv.apply_1q(cxd{std::cos(half), 0}, cxd{0, -std::sin(half)}, cxd{0, -std::sin(half)},
                    cxd{std::cos(half), 0}, g.qubits[0]);
        break;
    case GateKind::RY:
        sv.apply_1q(cxd{std::cos(half), 0}, cxd{-std::sin(half), 0}, cxd{std::sin(half), 0},
                    cxd{std::cos(half), 0}, g.qubits[0]);
        break;
    case GateKind::RZ:
        sv.apply_phase1q(std::polar(1.0, -half), std::polar(1.0, half), g.qubits[0]);
        break;
    case GateKind::CX: sv.apply_cx(g.qubits[0], g.qubits[1]); break;
    case GateKind::CZ:
        sv.apply_controlled_phase((std::size_t{1} << g.qubits[0]) | (std::size_t{1} << g.qubits[1]),
                                  cxd{-1.0, 0.0});
        break;
    case GateKind::CP:
        sv.apply_controlled_phase((std::size_t{1} << g.qubits[0]) | (std::size_t{1} << g.qubits[1]),
                                  std::polar(1.0, g.params[0].value));
        break;
    case GateKind::SWAP: sv.apply_swap(g.qubits[0], g.qubits[1]); break;
    case GateKind::CCX:
        sv.apply_controlled_x((std::size_t{1} << g.qubits[0]) | (std::size_t{1} << g.qubits[1]),
                              g.qubits[2]);
        break;
    case GateKind::MCX: {
        std::size_t mask = 0;
        for (std::size_t i = 0; i + 1 < g.qubits.size(); ++i) mask |= std::size_t{1} << g.qubits[i];
        sv.apply_controlled_x(mask, g.qubits.back());
        break;
    }
    case GateKind::U2Q: sv.apply_2q(*g.matrix, g.qubits[0], g.qubits[1]); break;
    default: break;
    }
}

struct MeasureMap {
    // clbit -> qubit measured into it (terminal measurement layout)
    std::vector<std::int32_t> qubit_for_clbit;
};

/// True when all measurements are terminal and there are no resets or
/// classically conditioned gates, i.e. the circuit is one unitary block
/// followed by measurement.
inline bool is_unitary_then_measure(const Circuit& c) {
    bool seen_measure = false;
    for (const Gate& g : c.gates()) {
        if (g.condition) return false;
        if (g.kind == GateKind::Reset) return false;
        if (g.kind == GateKind::Measure) {
            seen_measure = true;
        } else if (g.kind != GateKind::Barrier && seen_measure) {
            return false;
        }
    }
    return true;
}

inline std::vector<std::pair<std::uint32_t, std::uint32_t>> terminal_measures(const Circuit& c) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> qs; // (qubit, clbit)
    for (const Gate& g : c.gates())
        if (g.kind == GateKind::Measure) qs.push_back({g.qubits[0], static_cast<std::uint32_t>(g.clbit)});
    return qs;
}

inline std::uint64_t map_outcome(std::uint64_t qubit_string,
                                 const std::vector<std::pair<std::uint32_t, std::uint32_t>>& meas) {
    std::uint64_t out = 0;
    for (auto [q, c] : meas)
        if ((qubit_string >> q) & 1) out |= std::uint64_t{1} << c;
    return out;
}

} // namespace sim_detail

inline constexpr std::uint32_t kDefaultWidthLimit = 24;

/// Exact output distribution over the measured classical bits, assuming a
/// perfect quantum computer. Circuits with mid-circuit measurement, reset,
/// or conditioned gates are handled by branching enumeration over
/// measurement outcomes weighted by Born probabilities; branches below the
/// probability floor are pruned.
inline Distribution ideal_probabilities(const Circuit& c,
                                        std::uint32_t width_limit = kDefaultWidthLimit,
                                        double prune = 1e-12) {
    if (c.width() > width_limit)
        throw WidthLimitExceeded("circuit width " + std::to_string(c.width()) + " exceeds limit " +
                                 std::to_string(width_limit));
    require_valid(c);
    using sim_detail::StateVector;

    const std::uint32_t nc = c.num_clbits();
    const bool implicit_measure_all = nc == 0;
    const std::uint32_t out_width = implicit_measure_all ? c.width() : nc;

    struct Branch {
        StateVector sv;
        double weight;
        std::uint64_t clbits;
    };
    std::vector<Branch> branches;
    branches.push_back({StateVector(c.width()), 1.0, 0});

    Distribution result(out_width);
    auto meas = sim_detail::terminal_measures(c);

    // Fast path: pure unitary block + terminal measures needs no branching.
    if (sim_detail::is_unitary_then_measure(c)) {
        StateVector sv(c.width());
        for (const Gate& g : c.gates())
            if (g.is_unitary()) sim_detail::apply_gate(sv, g);
        if (implicit_measure_all) {
            for (std::size_t i = 0; i < sv.amp.size(); ++i) {
                const double p = std::norm(sv.amp[i]);
                if (p > 0.0) result.accumulate(i, p);
            }
        } else {
            for (std::size_t i = 0; i < sv.amp.size(); ++i) {
                const double p = std::norm(sv.amp[i]);
                if (p > 0.0) result.accumulate(sim_detail::map_outcome(i, meas), p);
            }
        }
        return result;
    }

    for (const Gate& g : c.gates()) {
        if (g.kind == GateKind::Barrier) continue;
        std::vector<Branch> next;
        for (Branch& b : branches) {
            if (g.condition) {
                const int bit = static_cast<int>((b.clbits >> g.condition->clbit) & 1);
                if (bit != g.condition->value) {
                    next.push_back(std::move(b));
                    continue;
                }
            }
            if (g.kind == GateKind::Measure || g.kind == GateKind::Reset) {
                const std::uint32_t q = g.qubits[0];
                const double p1 = b.sv.prob_one(q);
                for (int outcome = 0; outcome <= 1; ++outcome) {
                    const double p = outcome ? p1 : 1.0 - p1;
                    if (b.weight * p < prune) continue;
                    Branch nb{b.sv, b.weight * p, b.clbits};
                    nb.sv.collapse(q, outcome, p);
                    if (g.kind == GateKind::Measure) {
                        const std::uint64_t bit = std::uint64_t{1} << g.clbit;
                        nb.clbits = outcome ? (nb.clbits | bit) : (nb.clbits & ~bit);
                    } else if (outcome == 1) {
                        nb.sv.apply_x(q); // reset re-prepares |0>
                    }
                    next.push_back(std::move(nb));
                }
            } else {
                sim_detail::apply_gate(b.sv, g);
                next.push_back(std::move(b));
            }
        }
        branches = std::move(next);
    }

    for (const Branch& b : branches) {
        if (implicit_measure_all) {
            for (std::size_t i = 0; i < b.sv.amp.size(); ++i) {
                const double p = std::norm(b.sv.amp[i]);
                if (p > 0.0) result.accumulate(i, b.weight * p);
            }
        } else {
            result.accumulate(b.clbits, b.weight);
        }
    }
    return result;
}

namespace sim_detail {

inline int random_pauli_1q(Rng& rng) { return 1 + static_cast<int>(rng.uniform_int(3)); }

/// Uniform non-identity two-qubit Pauli as a pair (p_a, p_b), 0 = I.
inline std::pair<int, int> random_pauli_2q(Rng& rng) {
    const int k = 1 + static_cast<int>(rng.uniform_int(15));
    return {k & 3, k >> 2};
}

inline void insert_noise(StateVector& sv, const Gate& g, const NoiseModel& noise, Rng& rng) {
    if (!g.is_unitary()) return;
    const std::size_t arity = g.qubits.size();
    if (arity == 1 && noise.p1 > 0.0) {
        if (rng.uniform() < noise.p1) apply_pauli(sv, random_pauli_1q(rng), g.qubits[0]);
    } else if (arity == 2 && noise.p2 > 0.0) {
        if (rng.uniform() < noise.p2) {
            auto [pa, pb] = random_pauli_2q(rng);
            if (pa) apply_pauli(sv, pa, g.qubits[0]);
            if (pb) apply_pauli(sv, pb, g.qubits[1]);
        }
    }
}

inline double gate_error_prob(const Gate& g, const NoiseModel& noise) {
    if (!g.is_unitary()) return 0.0;
    if (g.qubits.size() == 1) return noise.p1;
    if (g.qubits.size() == 2) return noise.p2;
    return 0.0;
}

/// Samples an outcome index from a statevector (one linear scan).
inline std::uint64_t sample_from_state(const StateVector& sv, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < sv.amp.size(); ++i) {
        acc += std::norm(sv.amp[i]);
        if (u < acc) return i;
    }
    return sv.amp.size() - 1;
}

} // namespace sim_detail

/// Trajectory sampling of a noisy execution: every shot evolves the pure
/// state with stochastically inserted Paulis (see NoiseModel), mid-circuit
/// measurements sample and collapse, resets collapse and re-prepare |0>,
/// conditioned gates consult the shot's classical bits. Deterministic given
/// (circuit, noise, shots, seed): shot k uses an RNG stream derived from
/// (seed, k), so results are schedule-independent.
///
/// Unitary-then-measure circuits take a fast path: the state after every
/// gate prefix is cached once, shots without errors sample directly from the
/// ideal distribution, and shots with errors resume from the first error
/// position. This is an exact reformulation of the per-gate Bernoulli
/// process, not an approximation.
inline std::pair<Distribution, ExecTiming> sample_noisy(const Circuit& c, const NoiseModel& noise,
                                                        std::uint64_t shots, std::uint64_t seed,
                                                        std::uint32_t width_limit = kDefaultWidthLimit) {
    if (c.width() > width_limit)
        throw WidthLimitExceeded("circuit width " + std::to_string(c.width()) + " exceeds limit " +
                                 std::to_string(width_limit));
    if (shots < 1) throw Error("sample_noisy: shots must be >= 1");
    require_valid(c);
    if (has_symbols(c)) throw UnboundParameter("sample_noisy: circuit has unbound parameters");

    using sim_detail::StateVector;
    const auto t0 = std::chrono::steady_clock::now();

    const std::uint32_t nc = c.num_clbits();
    const bool implicit_measure_all = nc == 0;
    const std::uint32_t out_width = implicit_measure_all ? c.width() : nc;
    auto meas = sim_detail::terminal_measures(c);

    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t seed_state = seed;
    const std::uint64_t stream_base = splitmix64(seed_state);

    const bool fast = sim_detail::is_unitary_then_measure(c);
    if (fast) {
        // Collect unitary gates and per-gate first-error cumulative probabilities.
        std::vector<const Gate*> ugates;
        for (const Gate& g : c.gates())
            if (g.is_unitary()) ugates.push_back(&g);
        const std::size_t G = ugates.size();

        std::vector<double> first_error_cum(G, 0.0);
        double survive = 1.0;
        for (std::size_t i = 0; i < G; ++i) {
            const double p = sim_detail::gate_error_prob(*ugates[i], noise);
            const double here = survive * p;
            first_error_cum[i] = (i ? first_error_cum[i - 1] : 0.0) + here;
            survive *= 1.0 - p;
        }
        const double p_any_error = G ? first_error_cum[G - 1] : 0.0;

        // Prefix states (after gate i). Falls back to plain per-shot
        // simulation when the cache would be too large.
        const std::size_t state_bytes = (std::size_t{1} << c.width()) * sizeof(cxd);
        const bool cache_prefixes = state_bytes * (G + 1) <= (std::size_t{512} << 20);

        std::vector<StateVector> prefix;
        StateVector final_state(c.width());
        if (cache_prefixes) {
            prefix.reserve(G + 1);
            prefix.emplace_back(c.width());
            for (std::size_t i = 0; i < G; ++i) {
                StateVector next = prefix.back();
                sim_detail::apply_gate(next, *ugates[i]);
                prefix.push_back(std::move(next));
            }
            final_state = prefix.back();
        } else {
            for (std::size_t i = 0; i < G; ++i) sim_detail::apply_gate(final_state, *ugates[i]);
        }

        // CDF over the ideal final state for zero-error shots.
        std::vector<double> cdf(final_state.amp.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < cdf.size(); ++i) {
            acc += std::norm(final_state.amp[i]);
            cdf[i] = acc;
        }

        for (std::uint64_t shot = 0; shot < shots; ++shot) {
            std::uint64_t mix = stream_base ^ shot;
            Rng rng(splitmix64(mix));
            const double u = rng.uniform();
            std::uint64_t qubit_string;
            if (u >= p_any_error) {
                const double v = rng.uniform() * acc;
                qubit_string = static_cast<std::uint64_t>(
                    std::lower_bound(cdf.begin(), cdf.end(), v) - cdf.begin());
                if (qubit_string >= cdf.size()) qubit_string = cdf.size() - 1;
            } else {
                const std::size_t g0 = static_cast<std::size_t>(
                    std::upper_bound(first_error_cum.begin(), first_error_cum.end(), u) -
                    first_error_cum.begin());
                StateVector sv(c.width());
                if (cache_prefixes) {
                    sv = prefix[g0 + 1];
                } else {
                    for (std::size_t i = 0; i <= g0; ++i) sim_detail::apply_gate(sv, *ugates[i]);
                }
                // First error on gate g0's qubits, then ordinary Bernoulli
                // noise on the remaining gates.
                if (ugates[g0]->qubits.size() == 1) {
                    sim_detail::apply_pauli(sv, sim_detail::random_pauli_1q(rng), ugates[g0]->qubits[0]);
                } else {
                    auto [pa, pb] = sim_detail::random_pauli_2q(rng);
                    if (pa) sim_detail::apply_pauli(sv, pa, ugates[g0]->qubits[0]);
                    if (pb) sim_detail::apply_pauli(sv, pb, ugates[g0]->qubits[1]);
                }
                for (std::size_t i = g0 + 1; i < G; ++i) {
                    sim_detail::apply_gate(sv, *ugates[i]);
                    sim_detail::insert_noise(sv, *ugates[i], noise, rng);
                }
                qubit_string = sim_detail::sample_from_state(sv, rng);
            }
            const std::uint64_t outcome =
                implicit_measure_all ? qubit_string : sim_detail::map_outcome(qubit_string, meas);
            ++counts[outcome];
        }
    } else {
        for (std::uint64_t shot = 0; shot < shots; ++shot) {
            std::uint64_t mix = stream_base ^ shot;
            Rng rng(splitmix64(mix));
            StateVector sv(c.width());
            std::uint64_t clbits = 0;
            for (const Gate& g : c.gates()) {
                if (g.kind == GateKind::Barrier) continue;
                if (g.condition) {
                    const int bit = static_cast<int>((clbits >> g.condition->clbit) & 1);
                    if (bit != g.condition->value) continue;
                }
                if (g.kind == GateKind::Measure || g.kind == GateKind::Reset) {
                    const std::uint32_t q = g.qubits[0];
                    const double p1 = sv.prob_one(q);
                    const int outcome = rng.uniform() < p1 ? 1 : 0;
                    sv.collapse(q, outcome, outcome ? p1 : 1.0 - p1);
                    if (g.kind == GateKind::Measure) {
                        const std::uint64_t bit = std::uint64_t{1} << g.clbit;
                        clbits = outcome ? (clbits | bit) : (clbits & ~bit);
                    } else if (outcome == 1) {
                        sv.apply_x(q);
                    }
                    continue;
                }
                sim_detail::apply_gate(sv, g);
                sim_detail::insert_noise(sv, g, noise, rng);
            }
            std::uint64_t outcome;
            if (implicit_measure_all)
                outcome = sim_detail::sample_from_state(sv, rng);
            else
                outcome = clbits;
            ++counts[outcome];
        }
    }

    const auto t1 = std::chrono::steady_clock::now();
    ExecTiming timing;
    timing.shots = shots;
    timing.t_quantum = std::chrono::duration<double>(t1 - t0).count();
    return {Distribution::from_counts(out_width, counts), timing};
}

/// Exact noisy distribution by full density-matrix evolution of the
/// depolarizing channels. Test oracle only: width <= 6, no mid-circuit
/// measurement, reset, or conditioned gates.
inline Distribution density_oracle(const Circuit& c, const NoiseModel& noise) {
    if (c.width() > 6) throw WidthLimitExceeded("density_oracle supports width <= 6");
    if (!sim_detail::is_unitary_then_measure(c))
        throw Error("density_oracle: mid-circuit measurement/reset/conditions unsupported");
    require_valid(c);
    using sim_detail::StateVector;

    const std::uint32_t n = c.width();
    // The density matrix is evolved as a pure state on 2n qubits: ket side on
    // qubits [0, n), bra side on [n, 2n); a unitary U acts as U (ket) and
    // conj(U) (bra).
    StateVector rho(2 * n); // starts at |0><0|

    auto apply_both = [&](const Gate& g) {
        sim_detail::apply_gate(rho, g);
        Gate conj = g;
        // Entry-wise conjugate: RY and the permutation-like gates are real,
        // RX/RZ/CP conjugate by negating the angle.
        if (g.kind == GateKind::RX || g.kind == GateKind::RZ || g.kind == GateKind::CP)
            for (Param& p : conj.params) p.value = -p.value;
        for (auto& q : conj.qubits) q += n;
        if (g.kind == GateKind::U2Q)
            conj.matrix = std::make_shared<Eigen::Matrix4cd>(g.matrix->conjugate());
        sim_detail::apply_gate(rho, conj);
    };

    // P rho P: apply P to the ket side and conj(P) to the bra side.
    // conj(Y) = -Y, so each Y on the bra side costs one global sign flip.
    auto apply_pauli_both = [&](int p, std::uint32_t q) {
        sim_detail::apply_pauli(rho, p, q);
        sim_detail::apply_pauli(rho, p, q + n);
        if (p == 2)
            for (auto& a : rho.amp) a *= -1.0;
    };

    for (const Gate& g : c.gates()) {
        if (!g.is_unitary()) continue;
        apply_both(g);
        const double p = sim_detail::gate_error_prob(g, noise);
        if (p <= 0.0) continue;
        std::vector<cxd> mixed(rho.amp.size(), cxd{0, 0});
        const std::vector<cxd> base = rho.amp;
        auto add_scaled = [&](double w) {
            for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] += w * rho.amp[i];
        };
        if (g.qubits.size() == 1) {
            add_scaled(1.0 - p);
            for (int pp = 1; pp <= 3; ++pp) {
                rho.amp = base;
                apply_pauli_both(pp, g.qubits[0]);
                add_scaled(p / 3.0);
            }
        } else {
            add_scaled(1.0 - p);
            for (int k = 1; k < 16; ++k) {
                rho.amp = base;
                const int pa = k & 3, pb = k >> 2;
                if (pa) apply_pauli_both(pa, g.qubits[0]);
                if (pb) apply_pauli_both(pb, g.qubits[1]);
                add_scaled(p / 15.0);
            }
        }
        rho.amp = std::move(mixed);
    }

    // Diagonal of rho -> probabilities over qubit strings.
    const std::uint32_t nc = c.num_clbits();
    const bool implicit_measure_all = nc == 0;
    const std::uint32_t out_width = implicit_measure_all ? n : nc;
    auto meas = sim_detail::terminal_measures(c);
    Distribution result(out_width);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        const std::uint64_t idx = x | (x << n);
        const double p = rho.amp[idx].real();
        if (p <= 0.0) continue;
        result.accumulate(implicit_measure_all ? x : sim_detail::map_outcome(x, meas), p);
    }
    result.normalize();
    return result;
}

} // namespace qbench
