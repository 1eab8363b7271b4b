#pragma once

#include <vector>

#include "qbench/circuit.hpp"
#include "qbench/transpile.hpp"

namespace qbench {

/// SWAP-free quantum Fourier transform over the given qubits: afterwards
/// qubit qs[i] carries the factor (|0> + e^{2 pi i x / 2^{i+1}} |1>)/sqrt(2),
/// i.e. the usual QFT with the output order reversed.
inline void append_qft_noswap(Circuit& c, const std::vector<std::uint32_t>& qs) {
    const std::size_t t = qs.size();
    for (std::size_t i = t; i-- > 0;) {
        c.h(qs[i]);
        for (std::size_t j = i; j-- > 0;)
            c.cp(kPi / static_cast<double>(std::uint64_t{1} << (i - j)), qs[j], qs[i]);
    }
}

/// Exact inverse of append_qft_noswap.
inline void append_iqft_noswap(Circuit& c, const std::vector<std::uint32_t>& qs) {
    const std::size_t t = qs.size();
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < i; ++j)
            c.cp(-kPi / static_cast<double>(std::uint64_t{1} << (i - j)), qs[j], qs[i]);
        c.h(qs[i]);
    }
}

/// Adds the classical constant v to a Fourier-encoded register (Draper
/// adder): one rotation per qubit, sign = -1 subtracts.
inline void append_fourier_add(Circuit& c, const std::vector<std::uint32_t>& qs, std::uint64_t v,
                               int sign = 1) {
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const double theta =
            sign * 2.0 * kPi * static_cast<double>(v) / static_cast<double>(std::uint64_t{2} << i);
        if (!is_zero_angle(theta)) c.rz(canon_angle(theta), qs[i]);
    }
}

inline std::vector<std::uint32_t> qubit_range(std::uint32_t first, std::uint32_t count) {
    std::vector<std::uint32_t> qs(count);
    for (std::uint32_t i = 0; i < count; ++i) qs[i] = first + i;
    return qs;
}

} // namespace qbench
