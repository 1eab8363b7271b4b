#pragma once

#include <cmath>
#include <cstdint>

namespace qbench {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic PRNG (xoshiro256**). The standard library engines and
/// distributions are implementation-defined, so results files and golden
/// tests use this stream exclusively.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be nonzero.
    std::uint64_t uniform_int(std::uint64_t n) {
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Avalanche mix of a 5-tuple into one 64-bit seed. Used to derive
/// independent, reproducible streams for every (benchmark, size, circuit,
/// param) cell of a run; fixed across versions so results files are stable.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t benchmark_id, std::uint64_t size,
                                 std::uint64_t circuit_idx, std::uint64_t param_idx) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s ^= benchmark_id + 0x100000001b3ULL;
    h ^= splitmix64(s);
    s ^= size + 0xc6a4a7935bd1e995ULL;
    h ^= splitmix64(s);
    s ^= circuit_idx + 0x2545f4914f6cdd1dULL;
    h ^= splitmix64(s);
    s ^= param_idx + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    return h;
}

} // namespace qbench
