#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "qbench/circuit.hpp"
#include "qbench/qft.hpp"

namespace qbench {

inline std::uint64_t mod_mul(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return (a * b) % m; // moduli here are tiny
}

inline std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t result = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) result = mod_mul(result, base, m);
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    return result;
}

inline std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m) {
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(m), new_r = static_cast<std::int64_t>(a % m);
    while (new_r != 0) {
        const std::int64_t q = r / new_r;
        std::swap(t -= q * new_t, new_t);
        std::swap(r -= q * new_r, new_r);
    }
    if (r != 1) throw Error("mod_inverse: not invertible");
    return static_cast<std::uint64_t>(t < 0 ? t + static_cast<std::int64_t>(m) : t);
}

/// Multiplicative order of a modulo N by brute force.
inline std::uint64_t multiplicative_order(std::uint64_t a, std::uint64_t n) {
    if (std::gcd(a, n) != 1) throw Error("multiplicative_order: gcd(a, N) != 1");
    std::uint64_t v = a % n;
    std::uint64_t r = 1;
    while (v != 1) {
        v = mod_mul(v, a, n);
        ++r;
        if (r > n) throw Error("multiplicative_order: no order found");
    }
    return r;
}

inline bool is_semiprime(std::uint64_t n) {
    int factors = 0;
    for (std::uint64_t p = 2; p * p <= n && factors <= 2; ++p) {
        while (n % p == 0) {
            n /= p;
            ++factors;
        }
    }
    if (n > 1) ++factors;
    return factors == 2;
}

inline std::uint32_t bit_length(std::uint64_t v) {
    std::uint32_t bits = 0;
    while (v) {
        ++bits;
        v >>= 1;
    }
    return bits;
}

namespace shor_detail {

/// Doubly controlled phase, exact over {cp, cx}.
inline void append_ccp(Circuit& c, double theta, std::uint32_t c1, std::uint32_t c2,
                       std::uint32_t t) {
    c.cp(theta / 2, c2, t);
    c.cx(c1, c2);
    c.cp(-theta / 2, c2, t);
    c.cx(c1, c2);
    c.cp(theta / 2, c1, t);
}

inline void append_fourier_add_c(Circuit& c, std::uint32_t ctrl,
                                 const std::vector<std::uint32_t>& qs, std::uint64_t v, int sign) {
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const double theta = canon_angle(sign * 2.0 * kPi * static_cast<double>(v) /
                                         static_cast<double>(std::uint64_t{2} << i));
        if (!is_zero_angle(theta)) c.cp(theta, ctrl, qs[i]);
    }
}

inline void append_fourier_add_cc(Circuit& c, std::uint32_t c1, std::uint32_t c2,
                                  const std::vector<std::uint32_t>& qs, std::uint64_t v, int sign) {
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const double theta = canon_angle(sign * 2.0 * kPi * static_cast<double>(v) /
                                         static_cast<double>(std::uint64_t{2} << i));
        if (!is_zero_angle(theta)) append_ccp(c, theta, c1, c2, qs[i]);
    }
}

/// Doubly controlled modular adder on a Fourier-encoded accumulator of n+1
/// qubits plus one ancilla: |phi(b)> -> |phi((b + v) mod N)> when both
/// controls are set, for b, v < N. The accumulator's top qubit is the
/// overflow bit used against the ancilla.
inline void append_cc_phi_add_mod(Circuit& c, std::uint32_t c1, std::uint32_t c2,
                                  const std::vector<std::uint32_t>& acc, std::uint32_t anc,
                                  std::uint64_t v, std::uint64_t modulus) {
    const std::uint32_t msb = acc.back();
    append_fourier_add_cc(c, c1, c2, acc, v, +1);
    append_fourier_add(c, acc, modulus, -1);
    append_iqft_noswap(c, acc);
    c.cx(msb, anc);
    append_qft_noswap(c, acc);
    append_fourier_add_c(c, anc, acc, modulus, +1);
    append_fourier_add_cc(c, c1, c2, acc, v, -1);
    append_iqft_noswap(c, acc);
    c.x(msb);
    c.cx(msb, anc);
    c.x(msb);
    append_qft_noswap(c, acc);
    append_fourier_add_cc(c, c1, c2, acc, v, +1);
}

inline void append_cswap(Circuit& c, std::uint32_t ctrl, std::uint32_t a, std::uint32_t b) {
    c.cx(b, a);
    c.ccx(ctrl, a, b);
    c.cx(b, a);
}

struct ShorLayout {
    std::uint32_t n = 0; // bit length of the modulus
    std::vector<std::uint32_t> work;
    std::vector<std::uint32_t> acc;
    std::uint32_t anc = 0;
};

/// Controlled multiplication-accumulate: when ctrl is set, adds a*x mod N
/// into the accumulator (x read from the work register).
inline void append_cmult(Circuit& c, std::uint32_t ctrl, const ShorLayout& l, std::uint64_t a,
                         std::uint64_t modulus) {
    append_qft_noswap(c, l.acc);
    for (std::uint32_t i = 0; i < l.n; ++i) {
        const std::uint64_t v = mod_mul(a, std::uint64_t{1} << i, modulus);
        append_cc_phi_add_mod(c, ctrl, l.work[i], l.acc, l.anc, v, modulus);
    }
    append_iqft_noswap(c, l.acc);
}

/// Beauregard's controlled in-place modular multiplier:
/// |x, 0> -> |a x mod N, 0> when ctrl is set.
inline void append_controlled_ua(Circuit& c, std::uint32_t ctrl, const ShorLayout& l,
                                 std::uint64_t a, std::uint64_t modulus) {
    append_cmult(c, ctrl, l, a, modulus);
    for (std::uint32_t i = 0; i < l.n; ++i) append_cswap(c, ctrl, l.work[i], l.acc[i]);
    Circuit tmp(c.width());
    append_cmult(tmp, ctrl, l, mod_inverse(a, modulus), modulus);
    qbench::append_inverse(c, tmp.gates());
}

} // namespace shor_detail

/// Order-finding circuit with a full 2n-qubit counting register
/// (4n + 2 qubits total, n = bit length of the modulus).
inline Circuit build_shor_order_finding_1(std::uint64_t modulus, std::uint64_t base) {
    const std::uint32_t n = bit_length(modulus);
    const std::uint32_t k = 2 * n;
    Circuit c(4 * n + 2, k, "shor1");
    shor_detail::ShorLayout l;
    l.n = n;
    l.work = qubit_range(k, n);
    l.acc = qubit_range(k + n, n + 1);
    l.anc = 4 * n + 1;

    const auto counting = qubit_range(0, k);
    for (auto q : counting) c.h(q);
    c.x(l.work[0]);
    for (std::uint32_t j = 0; j < k; ++j) {
        const std::uint64_t power = mod_pow(base, std::uint64_t{1} << (k - 1 - j), modulus);
        shor_detail::append_controlled_ua(c, counting[j], l, power, modulus);
    }
    append_iqft_noswap(c, counting);
    for (std::uint32_t j = 0; j < k; ++j) c.measure(counting[j], j);
    return c;
}

/// Semiclassical variant: one control qubit reused with mid-circuit
/// measurement and reset; phase corrections are classically conditioned
/// (2n + 3 qubits total).
inline Circuit build_shor_order_finding_2(std::uint64_t modulus, std::uint64_t base) {
    const std::uint32_t n = bit_length(modulus);
    const std::uint32_t k = 2 * n;
    Circuit c(2 * n + 3, k, "shor2");
    const std::uint32_t ctrl = 0;
    shor_detail::ShorLayout l;
    l.n = n;
    l.work = qubit_range(1, n);
    l.acc = qubit_range(n + 1, n + 1);
    l.anc = 2 * n + 2;

    c.x(l.work[0]);
    for (std::uint32_t i = 0; i < k; ++i) {
        c.h(ctrl);
        const std::uint64_t power = mod_pow(base, std::uint64_t{1} << (k - 1 - i), modulus);
        shor_detail::append_controlled_ua(c, ctrl, l, power, modulus);
        for (std::uint32_t j = 0; j < i; ++j) {
            const double theta = -kPi / static_cast<double>(std::uint64_t{1} << (i - j));
            c.rz(theta, ctrl).if_bit(j, 1);
        }
        c.h(ctrl);
        c.measure(ctrl, i);
        c.reset(ctrl);
    }
    return c;
}

} // namespace qbench
