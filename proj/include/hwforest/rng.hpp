#pragma once

#include <cstdint>

namespace hwforest {

/// splitmix64 step. Used both as a standalone mixer (stable derivation of
/// per-tree and per-fold seeds from a master seed) and as the generator
/// behind Rng.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Mixes a stream index into a master seed. mix_seed(s, i) != mix_seed(s, j)
/// for i != j with overwhelming probability; results are platform independent.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(s);
}

/// Deterministic generator with hand-rolled bounded draws. The standard
/// distributions are implementation-defined across toolchains, so bounded
/// draws are written out explicitly to keep results reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform integer in [0, bound). bound must be > 0.
    /// Uses rejection sampling to avoid modulo bias.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound; // 2^64 mod bound
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi). Degenerate ranges return lo.
    double next_real(double lo, double hi) {
        if (!(lo < hi)) return lo;
        double v = lo + (hi - lo) * next_unit();
        return v < hi ? v : lo;
    }

private:
    std::uint64_t state_;
};

} // namespace hwforest
