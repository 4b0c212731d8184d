#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace fraudstream {

/// 64-bit seed for every randomized operation in the library. Equal seeds plus
/// equal inputs give bit-identical outputs, independent of platform stdlib.
struct RngSeed {
    std::uint64_t value = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Deterministic pseudo-random stream (xoshiro256++, seeded via splitmix64).
/// All distributions are implemented on top of the raw 64-bit output so that
/// sequences are reproducible across compilers and standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(RngSeed seed) {
        std::uint64_t sm = seed.value;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }
    explicit Rng(std::uint64_t seed) : Rng(RngSeed{seed}) {}

    std::uint64_t next() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    std::uint64_t operator()() { return next(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ULL; }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Lemire multiply-shift; deterministic.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    /// Standard normal via Box-Muller (uses two uniforms per pair, caches one).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent child seed from a master seed and a stream tag.
/// Used wherever the contracts call for deterministic per-context streams
/// (per-fold balancing, per-chunk generation, ...).
inline RngSeed derive_seed(RngSeed master, std::uint64_t tag) {
    std::uint64_t sm = master.value ^ (0xd1342543de82ef95ULL * (tag + 1));
    return RngSeed{detail::splitmix64(sm)};
}

inline Rng seeded_rng(RngSeed seed) { return Rng(seed); }

}  // namespace fraudstream
