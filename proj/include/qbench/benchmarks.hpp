#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qbench/circuit.hpp"
#include "qbench/metrics.hpp"
#include "qbench/pauli.hpp"
#include "qbench/qft.hpp"
#include "qbench/shor.hpp"
#include "qbench/simulator.hpp"
#include "qbench/transpile.hpp"

namespace qbench {

enum class BenchmarkId {
    DJ,
    BV1,
    BV2,
    HS,
    QFT1,
    QFT2,
    Grover,
    PE,
    AE,
    HamSim,
    MC1,
    MC2,
    VQE1,
    Shor1,
    Shor2,
};

inline const std::vector<BenchmarkId>& all_benchmarks() {
    static const std::vector<BenchmarkId> ids = {
        BenchmarkId::DJ,  BenchmarkId::BV1,    BenchmarkId::BV2, BenchmarkId::HS,
        BenchmarkId::QFT1, BenchmarkId::QFT2,  BenchmarkId::Grover, BenchmarkId::PE,
        BenchmarkId::AE,  BenchmarkId::HamSim, BenchmarkId::MC1, BenchmarkId::MC2,
        BenchmarkId::VQE1, BenchmarkId::Shor1, BenchmarkId::Shor2};
    return ids;
}

inline const char* benchmark_name(BenchmarkId id) {
    switch (id) {
    case BenchmarkId::DJ: return "dj";
    case BenchmarkId::BV1: return "bv1";
    case BenchmarkId::BV2: return "bv2";
    case BenchmarkId::HS: return "hs";
    case BenchmarkId::QFT1: return "qft1";
    case BenchmarkId::QFT2: return "qft2";
    case BenchmarkId::Grover: return "grover";
    case BenchmarkId::PE: return "pe";
    case BenchmarkId::AE: return "ae";
    case BenchmarkId::HamSim: return "hamsim";
    case BenchmarkId::MC1: return "mc1";
    case BenchmarkId::MC2: return "mc2";
    case BenchmarkId::VQE1: return "vqe1";
    case BenchmarkId::Shor1: return "shor1";
    case BenchmarkId::Shor2: return "shor2";
    }
    return "?";
}

inline const char* benchmark_category(BenchmarkId id) {
    switch (id) {
    case BenchmarkId::DJ:
    case BenchmarkId::BV1:
    case BenchmarkId::BV2:
    case BenchmarkId::HS: return "tutorial";
    case BenchmarkId::QFT1:
    case BenchmarkId::QFT2:
    case BenchmarkId::PE:
    case BenchmarkId::AE: return "subroutine";
    default: return "functional";
    }
}

inline std::optional<BenchmarkId> benchmark_from_name(const std::string& name) {
    for (auto id : all_benchmarks())
        if (name == benchmark_name(id)) return id;
    return std::nullopt;
}

// --- Instance payloads -----------------------------------------------------

struct DjPayload {
    bool balanced = false;
};
struct SecretPayload {
    std::uint64_t secret = 0; // BV secret / HS shift
};
struct BasisStatePayload {
    std::uint64_t x = 0;
};
struct MarkedPayload {
    std::uint64_t marked = 0;
};
struct PhasePayload {
    std::uint64_t numerator = 1; // phase = numerator / 2^k
};
struct AmplitudePayload {
    std::uint64_t numerator = 1; // amplitude = sin^2(pi numerator / 2^k)
};

/// Anti-ferromagnetic Heisenberg chain with disordered x/z fields. The
/// default evolution time keeps the ideal output concentrated enough to be
/// estimated from a 1000-shot run; both knobs land in the results metadata.
struct HamiltonianSpec {
    std::uint32_t sites = 0;
    double j_coupling = 1.0;
    double w_disorder = 10.0;
    std::vector<double> h_x;
    std::vector<double> h_z;
    std::uint32_t trotter_steps = 5;
    double total_time = 0.01;
};

struct McPayload {
    std::vector<double> probs; // distribution table over state-qubit patterns (MC1)
    std::vector<double> fvals; // function table in [0,1] (MC1)
};

struct VqeExcitation {
    std::vector<std::size_t> orbitals; // (i, a) single or (i, j, a, b) double
};
struct VqePayload {
    std::vector<VqeExcitation> excitations;
    std::uint32_t occupied = 2;
};

struct ShorPayload {
    std::uint64_t modulus = 15;
    std::uint64_t base = 7;
    std::uint64_t order = 4;
};

using InstancePayload = std::variant<DjPayload, SecretPayload, BasisStatePayload, MarkedPayload,
                                     PhasePayload, AmplitudePayload, HamiltonianSpec, McPayload,
                                     VqePayload, ShorPayload>;

struct ProblemInstance {
    BenchmarkId benchmark = BenchmarkId::DJ;
    std::uint32_t size = 0;
    InstancePayload payload;

    std::string summary() const;
};

// --- Size validity ----------------------------------------------------------

/// Smallest valid problem size per family. HS needs pairs of qubits, HamSim
/// the two-sublattice Trotter layout, AE/MC a nondegenerate counting
/// register, VQE1 occupied plus virtual orbitals, and the Shor variants a
/// semiprime modulus of that bit length (none exists below 3 bits).
inline std::uint32_t min_size(BenchmarkId id) {
    switch (id) {
    case BenchmarkId::AE:
    case BenchmarkId::HamSim:
    case BenchmarkId::Shor1:
    case BenchmarkId::Shor2: return 3;
    case BenchmarkId::MC1:
    case BenchmarkId::MC2:
    case BenchmarkId::VQE1: return 4;
    default: return 2;
    }
}

inline bool valid_size(BenchmarkId id, std::uint32_t n) {
    if (n < min_size(id)) return false;
    if (id == BenchmarkId::HS && n % 2 != 0) return false;
    if (id == BenchmarkId::VQE1 && n % 2 != 0) return false;
    return true;
}

/// Circuit width used for a problem of size n.
inline std::uint32_t instance_width(BenchmarkId id, std::uint32_t n) {
    switch (id) {
    case BenchmarkId::DJ:
    case BenchmarkId::BV1: return n + 1;
    case BenchmarkId::BV2: return 2;
    case BenchmarkId::Shor1: return 4 * n + 2;
    case BenchmarkId::Shor2: return 2 * n + 3;
    default: return n;
    }
}

/// Width of the measured output register.
inline std::uint32_t measured_width(BenchmarkId id, std::uint32_t n) {
    switch (id) {
    case BenchmarkId::PE:
    case BenchmarkId::AE: return n - 1;
    case BenchmarkId::MC1:
    case BenchmarkId::MC2: return n - 2;
    case BenchmarkId::Shor1:
    case BenchmarkId::Shor2: return 2 * n;
    default: return n;
    }
}

// --- Instance sampling -------------------------------------------------------

inline std::vector<std::uint64_t> semiprimes_with_bits(std::uint32_t bits) {
    std::vector<std::uint64_t> out;
    const std::uint64_t lo = std::uint64_t{1} << (bits - 1);
    const std::uint64_t hi = std::uint64_t{1} << bits;
    for (std::uint64_t v = lo; v < hi; ++v)
        if (is_semiprime(v)) out.push_back(v);
    return out;
}

inline ProblemInstance sample_instance(BenchmarkId id, std::uint32_t n, Rng& rng) {
    if (!valid_size(id, n))
        throw InvalidSize(std::string(benchmark_name(id)) + ": invalid problem size " +
                          std::to_string(n));
    ProblemInstance inst;
    inst.benchmark = id;
    inst.size = n;
    switch (id) {
    case BenchmarkId::DJ: inst.payload = DjPayload{rng.uniform() < 0.5}; break;
    case BenchmarkId::BV1:
    case BenchmarkId::BV2: inst.payload = SecretPayload{rng.uniform_int(std::uint64_t{1} << n)}; break;
    case BenchmarkId::HS:
        // shift 0 is a degenerate instance (no X layer) and is excluded
        inst.payload = SecretPayload{1 + rng.uniform_int((std::uint64_t{1} << n) - 1)};
        break;
    case BenchmarkId::QFT1:
    case BenchmarkId::QFT2: inst.payload = BasisStatePayload{rng.uniform_int(std::uint64_t{1} << n)}; break;
    case BenchmarkId::Grover: inst.payload = MarkedPayload{rng.uniform_int(std::uint64_t{1} << n)}; break;
    case BenchmarkId::PE: {
        const std::uint64_t dim = std::uint64_t{1} << (n - 1);
        inst.payload = PhasePayload{1 + rng.uniform_int(dim - 1)}; // exclude phase 0
        break;
    }
    case BenchmarkId::AE: {
        const std::uint64_t half = std::uint64_t{1} << (n - 2);
        inst.payload = AmplitudePayload{1 + rng.uniform_int(half - 1)}; // exclude a = 0, 1
        break;
    }
    case BenchmarkId::HamSim: {
        HamiltonianSpec spec;
        spec.sites = n;
        spec.h_x.resize(n);
        spec.h_z.resize(n);
        for (auto& v : spec.h_x) v = rng.uniform(-1.0, 1.0);
        for (auto& v : spec.h_z) v = rng.uniform(-1.0, 1.0);
        inst.payload = std::move(spec);
        break;
    }
    case BenchmarkId::MC1: {
        // Tables are sampled so that the expectation value a = sum p_i f_i is
        // exactly encodable in the counting register (the outcome oracle
        // handles arbitrary tables; instances keep the ideal concentrated).
        const std::uint32_t k = n - 2;
        const std::uint64_t half = std::uint64_t{1} << (k - 1);
        const std::uint64_t m = 1 + (half > 1 ? rng.uniform_int(half - 1) : 0);
        const double a = std::pow(
            std::sin(kPi * static_cast<double>(m) / static_cast<double>(std::uint64_t{1} << k)), 2.0);
        McPayload mc;
        const double f0 = a * rng.uniform(0.1, 0.8);
        const double f1 = a + (1.0 - a) * rng.uniform(0.2, 0.9);
        const double p1 = (a - f0) / (f1 - f0);
        mc.probs = {1.0 - p1, p1};
        mc.fvals = {f0, f1};
        inst.payload = std::move(mc);
        break;
    }
    case BenchmarkId::MC2: inst.payload = McPayload{}; break;
    case BenchmarkId::VQE1: {
        VqePayload vqe;
        vqe.occupied = 2;
        for (std::size_t i = 0; i < vqe.occupied; ++i)
            for (std::size_t a = vqe.occupied; a < n; ++a) vqe.excitations.push_back({{i, a}});
        for (std::size_t a = vqe.occupied; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) vqe.excitations.push_back({{0, 1, a, b}});
        inst.payload = std::move(vqe);
        break;
    }
    case BenchmarkId::Shor1:
    case BenchmarkId::Shor2: {
        const auto moduli = semiprimes_with_bits(n);
        if (moduli.empty())
            throw InvalidSize("no semiprime modulus with bit length " + std::to_string(n));
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const std::uint64_t modulus = moduli[rng.uniform_int(moduli.size())];
            const std::uint64_t a = 2 + rng.uniform_int(modulus - 2);
            if (std::gcd(a, modulus) != 1) continue;
            const std::uint64_t r = multiplicative_order(a, modulus);
            if (r <= 1) continue;
            inst.payload = ShorPayload{modulus, a, r};
            return inst;
        }
        throw InvalidInstance("could not sample a Shor instance");
    }
    }
    return inst;
}

inline std::vector<ProblemInstance> sample_instances(BenchmarkId id, std::uint32_t n,
                                                     std::size_t count, Rng& rng) {
    std::vector<ProblemInstance> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_instance(id, n, rng));
    return out;
}

// --- Parameter handling (VQE1) ----------------------------------------------

inline std::vector<std::string> param_symbols(const ProblemInstance& inst) {
    std::vector<std::string> out;
    if (auto* vqe = std::get_if<VqePayload>(&inst.payload)) {
        for (std::size_t e = 0; e < vqe->excitations.size(); ++e)
            out.push_back("t" + std::to_string(e));
    }
    return out;
}

/// Random parameter binding; VQE cluster amplitudes are drawn in a
/// perturbative range so the ansatz state stays concentrated.
inline std::map<std::string, double> sample_param_binding(const ProblemInstance& inst, Rng& rng) {
    std::map<std::string, double> out;
    for (const auto& sym : param_symbols(inst)) out[sym] = rng.uniform(-0.3, 0.3);
    return out;
}

// --- Circuit construction ----------------------------------------------------

namespace bench_detail {

inline Circuit build_dj(std::uint32_t n, bool balanced) {
    Circuit c(n + 1, n, "dj");
    c.x(n).h(n);
    for (std::uint32_t q = 0; q < n; ++q) c.h(q);
    if (balanced)
        for (std::uint32_t q = 0; q < n; ++q) c.cx(q, n); // parity function
    for (std::uint32_t q = 0; q < n; ++q) c.h(q);
    for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
    return c;
}

inline Circuit build_bv1(std::uint32_t n, std::uint64_t secret) {
    Circuit c(n + 1, n, "bv1");
    c.x(n).h(n);
    for (std::uint32_t q = 0; q < n; ++q) c.h(q);
    for (std::uint32_t q = 0; q < n; ++q)
        if ((secret >> q) & 1) c.cx(q, n);
    for (std::uint32_t q = 0; q < n; ++q) c.h(q);
    for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
    return c;
}

/// Two-qubit Bernstein-Vazirani: the data qubit is interrogated bit by bit
/// and reset in between, reusing the same |-> ancilla throughout.
inline Circuit build_bv2(std::uint32_t n, std::uint64_t secret) {
    Circuit c(2, n, "bv2");
    c.x(1).h(1);
    for (std::uint32_t bit = 0; bit < n; ++bit) {
        c.h(0);
        if ((secret >> bit) & 1) c.cx(0, 1);
        c.h(0);
        c.measure(0, bit);
        c.reset(0);
    }
    return c;
}

inline Circuit build_hs(std::uint32_t n, std::uint64_t shift) {
    Circuit c(n, n, "hs");
    auto oracle = [&] {
        for (std::uint32_t q = 0; q + 1 < n; q += 2) c.cz(q, q + 1);
    };
    auto shift_layer = [&] {
        for (std::uint32_t q = 0; q < n; ++q)
            if ((shift >> q) & 1) c.x(q);
    };
    // Stage barriers keep the depth independent of which bits of the shift
    // are set (the cz decomposition is one-sided, so unaligned stages would
    // otherwise shift by a layer or two per instance).
    for (std::uint32_t q = 0; q < n; ++q) c.h(q);
    c.barrier();
    shift_layer();
    c.barrier();
    oracle();
    c.barrier();
    shift_layer();
    c.barrier();
    for (std::uint32_t q = 0; q < n; ++q) c.h(q);
    c.barrier();
    oracle();
    c.barrier();
    for (std::uint32_t q = 0; q < n; ++q) c.h(q);
    for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
    return c;
}

inline Circuit build_qft1(std::uint32_t n, std::uint64_t x) {
    Circuit c(n, n, "qft1");
    for (std::uint32_t q = 0; q < n; ++q)
        if ((x >> q) & 1) c.x(q);
    const auto qs = qubit_range(0, n);
    append_qft_noswap(c, qs);
    append_fourier_add(c, qs, 1, +1); // +1 in Fourier space
    append_iqft_noswap(c, qs);
    for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
    return c;
}

inline Circuit build_qft2(std::uint32_t n, std::uint64_t x) {
    Circuit c(n, n, "qft2");
    for (std::uint32_t q = 0; q < n; ++q) {
        c.h(q);
        const double theta = canon_angle(2.0 * kPi * static_cast<double>(x) /
                                         static_cast<double>(std::uint64_t{2} << q));
        if (!is_zero_angle(theta)) c.rz(theta, q);
    }
    append_iqft_noswap(c, qubit_range(0, n));
    for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
    return c;
}

inline std::uint32_t grover_iterations(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        std::floor(kPi / 4.0 * std::sqrt(static_cast<double>(std::uint64_t{1} << n))));
}

inline void append_mcz_all(Circuit& c, std::uint32_t n) {
    if (n == 1) {
        // Z on a single qubit; never reached for Grover sizes >= 2.
        c.rz(kPi, 0);
        return;
    }
    std::vector<std::uint32_t> controls = qubit_range(0, n - 1);
    c.h(n - 1);
    c.mcx(controls, n - 1);
    c.h(n - 1);
}

inline Circuit build_grover(std::uint32_t n, std::uint64_t marked) {
    Circuit c(n, n, "grover");
    for (std::uint32_t q = 0; q < n; ++q) c.h(q);
    const std::uint32_t reps = grover_iterations(n);
    for (std::uint32_t it = 0; it < reps; ++it) {
        // phase oracle: -1 on |marked>
        for (std::uint32_t q = 0; q < n; ++q)
            if (!((marked >> q) & 1)) c.x(q);
        append_mcz_all(c, n);
        for (std::uint32_t q = 0; q < n; ++q)
            if (!((marked >> q) & 1)) c.x(q);
        // diffusion
        for (std::uint32_t q = 0; q < n; ++q) c.h(q);
        for (std::uint32_t q = 0; q < n; ++q) c.x(q);
        append_mcz_all(c, n);
        for (std::uint32_t q = 0; q < n; ++q) c.x(q);
        for (std::uint32_t q = 0; q < n; ++q) c.h(q);
    }
    for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
    return c;
}

inline Circuit build_pe(std::uint32_t n, std::uint64_t numerator) {
    const std::uint32_t k = n - 1;
    Circuit c(n, k, "pe");
    const double phi = static_cast<double>(numerator) / static_cast<double>(std::uint64_t{1} << k);
    c.x(k); // eigenstate |1> of the phase gate
    for (std::uint32_t j = 0; j < k; ++j) c.h(j);
    for (std::uint32_t j = 0; j < k; ++j) {
        const double theta = canon_angle(
            2.0 * kPi * phi * static_cast<double>(std::uint64_t{1} << (k - 1 - j)));
        if (!is_zero_angle(theta)) c.cp(theta, j, k);
    }
    append_iqft_noswap(c, qubit_range(0, k));
    for (std::uint32_t j = 0; j < k; ++j) c.measure(j, j);
    return c;
}

/// One application of the controlled Grover operator for amplitude
/// estimation on a single object qubit. The operator is
/// Q = -A S0 A^dag S_chi; the -1 becomes a phase on the control.
inline void append_ae_controlled_q(Circuit& c, std::uint32_t ctrl, std::uint32_t obj,
                                   double theta_a) {
    c.cz(ctrl, obj);        // controlled S_chi
    c.ry(-2.0 * theta_a, obj); // A^dag
    c.x(obj);
    c.cp(kPi, ctrl, obj);   // controlled S0 (phase on |0>_obj)
    c.x(obj);
    c.ry(2.0 * theta_a, obj); // A
    c.rz(kPi, ctrl);        // global -1 of Q, controlled
}

inline Circuit build_ae(std::uint32_t n, std::uint64_t numerator) {
    const std::uint32_t k = n - 1;
    const std::uint32_t obj = k;
    Circuit c(n, k, "ae");
    const double theta_a = kPi * static_cast<double>(numerator) /
                           static_cast<double>(std::uint64_t{1} << k);
    c.ry(2.0 * theta_a, obj); // A |0> = sqrt(1-a)|0> + sqrt(a)|1>
    for (std::uint32_t j = 0; j < k; ++j) c.h(j);
    for (std::uint32_t j = 0; j < k; ++j) {
        const std::uint64_t reps = std::uint64_t{1} << (k - 1 - j);
        for (std::uint64_t r = 0; r < reps; ++r) append_ae_controlled_q(c, j, obj, theta_a);
    }
    append_iqft_noswap(c, qubit_range(0, k));
    for (std::uint32_t j = 0; j < k; ++j) c.measure(j, j);
    return c;
}

inline Circuit build_hamsim(const HamiltonianSpec& spec) {
    const std::uint32_t n = spec.sites;
    Circuit c(n, n, "hamsim");
    const double tau = spec.total_time / static_cast<double>(spec.trotter_steps);
    for (std::uint32_t q = 1; q < n; q += 2) c.x(q); // alternating product state
    c.barrier();
    // Barriers pin the brick-wall alignment so depth stays flat in width
    // instead of the idle boundary qubits drifting ahead.
    for (std::uint32_t step = 0; step < spec.trotter_steps; ++step) {
        for (std::uint32_t q = 0; q < n; ++q)
            c.rx(2.0 * tau * spec.w_disorder * spec.h_x[q], q);
        for (std::uint32_t q = 0; q < n; ++q)
            c.rz(2.0 * tau * spec.w_disorder * spec.h_z[q], q);
        c.barrier();
        const double g = -tau * spec.j_coupling;
        for (std::uint32_t q = 0; q + 1 < n; q += 2)
            c.append_all(canonical_block(g, g, g, q, q + 1)); // exp(-i tau J sigma.sigma)
        c.barrier();
        for (std::uint32_t q = 1; q + 1 < n; q += 2)
            c.append_all(canonical_block(g, g, g, q, q + 1));
        c.barrier();
    }
    for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q);
    return c;
}

/// Exact amplitude encoding of sqrt(p) over the state qubits via uniformly
/// controlled ry rotations (one level per qubit).
inline void append_state_prep(Circuit& c, const std::vector<std::uint32_t>& state,
                              const std::vector<double>& probs) {
    const std::size_t m = state.size();
    for (std::size_t level = 0; level < m; ++level) {
        const std::size_t patterns = std::size_t{1} << level;
        std::vector<double> angles(patterns, 0.0);
        for (std::size_t pat = 0; pat < patterns; ++pat) {
            double mass0 = 0.0, mass1 = 0.0;
            for (std::size_t x = 0; x < probs.size(); ++x) {
                if ((x & (patterns - 1)) != pat) continue;
                if ((x >> level) & 1)
                    mass1 += probs[x];
                else
                    mass0 += probs[x];
            }
            const double total = mass0 + mass1;
            if (total > 0.0) angles[pat] = 2.0 * std::asin(std::sqrt(mass1 / total));
        }
        std::vector<Gate> seq;
        std::vector<std::uint32_t> controls(state.begin(), state.begin() + level);
        multiplexed_rot(seq, GateKind::RY, controls, state[level], angles);
        c.append_all(seq);
    }
}

struct McLayout {
    std::uint32_t k = 0; // counting qubits 0..k-1
    std::vector<std::uint32_t> state;
    std::uint32_t anc = 0;
};

inline std::vector<Gate> mc_a_operator(std::uint32_t width, const McLayout& l,
                                       const McPayload& mc, bool uniform) {
    Circuit a(width);
    if (uniform) {
        for (auto q : l.state) a.h(q);
        for (auto q : l.state) a.cx(q, l.anc); // parity function
    } else {
        append_state_prep(a, l.state, mc.probs);
        std::vector<double> angles(mc.fvals.size());
        for (std::size_t i = 0; i < angles.size(); ++i)
            angles[i] = 2.0 * std::asin(std::sqrt(mc.fvals[i]));
        std::vector<Gate> seq;
        multiplexed_rot(seq, GateKind::RY, l.state, l.anc, angles);
        a.append_all(seq);
    }
    return a.gates();
}

inline Circuit build_mc(std::uint32_t n, const McPayload& mc, bool uniform) {
    const std::uint32_t k = n - 2;
    McLayout l;
    l.k = k;
    l.state = {k};
    l.anc = k + 1;
    Circuit c(n, k, uniform ? "mc2" : "mc1");
    const auto a_gates = mc_a_operator(n, l, mc, uniform);

    c.append_all(a_gates);
    for (std::uint32_t j = 0; j < k; ++j) c.h(j);
    for (std::uint32_t j = 0; j < k; ++j) {
        const std::uint64_t reps = std::uint64_t{1} << (k - 1 - j);
        for (std::uint64_t r = 0; r < reps; ++r) {
            // controlled Q = -A S0 A^dag S_chi
            c.cz(j, l.anc);
            append_inverse(c, a_gates);
            // controlled phase on |0...0> of (state, anc): X-conjugated MCP
            for (auto q : l.state) c.x(q);
            c.x(l.anc);
            std::vector<Gate> seq;
            std::vector<std::uint32_t> controls = {j};
            controls.insert(controls.end(), l.state.begin(), l.state.end());
            mcp(seq, kPi, controls, l.anc);
            c.append_all(seq);
            for (auto q : l.state) c.x(q);
            c.x(l.anc);
            c.append_all(a_gates);
            c.rz(kPi, j); // the -1 in Q, controlled
        }
    }
    append_iqft_noswap(c, qubit_range(0, k));
    for (std::uint32_t j = 0; j < k; ++j) c.measure(j, j);
    return c;
}

inline Circuit build_vqe1(std::uint32_t n, const VqePayload& vqe) {
    Circuit c(n, n, "vqe1");
    for (std::uint32_t q = 0; q < vqe.occupied; ++q) c.x(q); // Hartree-Fock reference
    for (std::size_t e = 0; e < vqe.excitations.size(); ++e) {
        const auto& orbs = vqe.excitations[e].orbitals;
        PauliTermList terms;
        if (orbs.size() == 2)
            terms = single_excitation_terms(orbs[0], orbs[1], n, 1.0);
        else
            terms = double_excitation_terms(orbs[0], orbs[1], orbs[2], orbs[3], n, 1.0);
        const std::string symbol = "t" + std::to_string(e);
        for (const auto& term : terms)
            append_pauli_exponential_sym(c, term.word, symbol, term.coefficient);
    }
    for (std::uint32_t q = 0; q < n; ++q) c.measure(q, q); // fixed measurement basis
    return c;
}

} // namespace bench_detail

namespace bench_detail {

template <typename T>
const T& payload_as(const ProblemInstance& inst) {
    const T* p = std::get_if<T>(&inst.payload);
    if (!p)
        throw InvalidInstance(std::string("payload type does not match benchmark ") +
                              benchmark_name(inst.benchmark));
    return *p;
}

} // namespace bench_detail

inline Circuit build_circuit(const ProblemInstance& inst) {
    using namespace bench_detail;
    const std::uint32_t n = inst.size;
    Circuit c;
    switch (inst.benchmark) {
    case BenchmarkId::DJ: c = build_dj(n, bench_detail::payload_as<DjPayload>(inst).balanced); break;
    case BenchmarkId::BV1: c = build_bv1(n, bench_detail::payload_as<SecretPayload>(inst).secret); break;
    case BenchmarkId::BV2: c = build_bv2(n, bench_detail::payload_as<SecretPayload>(inst).secret); break;
    case BenchmarkId::HS: c = build_hs(n, bench_detail::payload_as<SecretPayload>(inst).secret); break;
    case BenchmarkId::QFT1: c = build_qft1(n, bench_detail::payload_as<BasisStatePayload>(inst).x); break;
    case BenchmarkId::QFT2: c = build_qft2(n, bench_detail::payload_as<BasisStatePayload>(inst).x); break;
    case BenchmarkId::Grover: c = build_grover(n, bench_detail::payload_as<MarkedPayload>(inst).marked); break;
    case BenchmarkId::PE: c = build_pe(n, bench_detail::payload_as<PhasePayload>(inst).numerator); break;
    case BenchmarkId::AE: c = build_ae(n, bench_detail::payload_as<AmplitudePayload>(inst).numerator); break;
    case BenchmarkId::HamSim: c = build_hamsim(bench_detail::payload_as<HamiltonianSpec>(inst)); break;
    case BenchmarkId::MC1: c = build_mc(n, bench_detail::payload_as<McPayload>(inst), false); break;
    case BenchmarkId::MC2: c = build_mc(n, bench_detail::payload_as<McPayload>(inst), true); break;
    case BenchmarkId::VQE1: c = build_vqe1(n, bench_detail::payload_as<VqePayload>(inst)); break;
    case BenchmarkId::Shor1: {
        const auto& p = bench_detail::payload_as<ShorPayload>(inst);
        c = build_shor_order_finding_1(p.modulus, p.base);
        break;
    }
    case BenchmarkId::Shor2: {
        const auto& p = bench_detail::payload_as<ShorPayload>(inst);
        c = build_shor_order_finding_2(p.modulus, p.base);
        break;
    }
    }
    c.set_tag(std::string(benchmark_name(inst.benchmark)) + " n=" + std::to_string(n) + " " +
              inst.summary());
    return c;
}

// --- Ideal distributions ------------------------------------------------------

/// Ideal output distribution. Analytic where the family admits it; HamSim,
/// VQE1 and the Shor variants fall back to noiseless simulation of the
/// (bound) circuit, which costs exponential classical time.
inline Distribution ideal_distribution(const ProblemInstance& inst, const Circuit& bound_circuit) {
    const std::uint32_t n = inst.size;
    switch (inst.benchmark) {
    case BenchmarkId::DJ:
        return bench_detail::payload_as<DjPayload>(inst).balanced
                   ? Distribution::delta(n, (std::uint64_t{1} << n) - 1)
                   : Distribution::delta(n, 0);
    case BenchmarkId::BV1:
    case BenchmarkId::BV2: return Distribution::delta(n, bench_detail::payload_as<SecretPayload>(inst).secret);
    case BenchmarkId::HS: return Distribution::delta(n, bench_detail::payload_as<SecretPayload>(inst).secret);
    case BenchmarkId::QFT1: {
        const std::uint64_t x = bench_detail::payload_as<BasisStatePayload>(inst).x;
        return Distribution::delta(n, (x + 1) % (std::uint64_t{1} << n));
    }
    case BenchmarkId::QFT2: return Distribution::delta(n, bench_detail::payload_as<BasisStatePayload>(inst).x);
    case BenchmarkId::Grover: {
        const std::uint64_t marked = bench_detail::payload_as<MarkedPayload>(inst).marked;
        const std::uint64_t dim = std::uint64_t{1} << n;
        const double theta = std::asin(1.0 / std::sqrt(static_cast<double>(dim)));
        const std::uint32_t k = bench_detail::grover_iterations(n);
        const double p_marked = std::pow(std::sin((2.0 * k + 1.0) * theta), 2.0);
        Distribution d(n);
        const double rest = (1.0 - p_marked) / static_cast<double>(dim - 1);
        for (std::uint64_t x = 0; x < dim; ++x) d.set(x, x == marked ? p_marked : rest);
        return d;
    }
    case BenchmarkId::PE:
        return Distribution::delta(n - 1, bench_detail::payload_as<PhasePayload>(inst).numerator);
    case BenchmarkId::AE: {
        // folded outcome: min(b, 2^k - b); the exact-encodable pair collapses
        // to a delta at the numerator
        return Distribution::delta(n - 1, bench_detail::payload_as<AmplitudePayload>(inst).numerator);
    }
    case BenchmarkId::MC1:
    case BenchmarkId::MC2: {
        const std::uint32_t k = n - 2;
        double a = 0.5;
        if (inst.benchmark == BenchmarkId::MC1) {
            const auto& mc = bench_detail::payload_as<McPayload>(inst);
            a = 0.0;
            for (std::size_t i = 0; i < mc.probs.size(); ++i) a += mc.probs[i] * mc.fvals[i];
        }
        const double phi = std::asin(std::sqrt(a)) / kPi;
        auto lo = pe_outcome_distribution(k, phi);
        auto hi = pe_outcome_distribution(k, 1.0 - phi);
        Distribution d(k);
        for (auto& [key, v] : lo.probs()) d.accumulate(key, 0.5 * v);
        for (auto& [key, v] : hi.probs()) d.accumulate(key, 0.5 * v);
        return d;
    }
    case BenchmarkId::HamSim:
    case BenchmarkId::VQE1:
    case BenchmarkId::Shor1:
    case BenchmarkId::Shor2: return ideal_probabilities(bound_circuit);
    }
    throw InvalidInstance("unknown benchmark");
}

/// Benchmark-specific post-processing applied to both ideal and empirical
/// distributions before the fidelity comparison. Amplitude estimation folds
/// the symmetric outcome pair b, 2^k - b onto one amplitude estimate.
inline Distribution post_process(const ProblemInstance& inst, const Distribution& d) {
    if (inst.benchmark != BenchmarkId::AE) return d;
    const std::uint64_t dim = std::uint64_t{1} << d.width();
    return d.remapped(d.width(), [dim](std::uint64_t b) { return std::min(b, (dim - b) % dim); });
}

inline std::string ProblemInstance::summary() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DjPayload>) {
                os << (p.balanced ? "balanced" : "constant");
            } else if constexpr (std::is_same_v<T, SecretPayload>) {
                os << "secret=" << p.secret;
            } else if constexpr (std::is_same_v<T, BasisStatePayload>) {
                os << "x=" << p.x;
            } else if constexpr (std::is_same_v<T, MarkedPayload>) {
                os << "marked=" << p.marked;
            } else if constexpr (std::is_same_v<T, PhasePayload>) {
                os << "m=" << p.numerator;
            } else if constexpr (std::is_same_v<T, AmplitudePayload>) {
                os << "m=" << p.numerator;
            } else if constexpr (std::is_same_v<T, HamiltonianSpec>) {
                os << "J=" << p.j_coupling << " w=" << p.w_disorder << " K=" << p.trotter_steps
                   << " t=" << p.total_time;
            } else if constexpr (std::is_same_v<T, McPayload>) {
                os << (p.probs.empty() ? "uniform/parity" : "table");
            } else if constexpr (std::is_same_v<T, VqePayload>) {
                os << p.excitations.size() << " excitations";
            } else if constexpr (std::is_same_v<T, ShorPayload>) {
                os << "N=" << p.modulus << " a=" << p.base << " r=" << p.order;
            }
        },
        payload);
    return os.str();
}

} // namespace qbench
