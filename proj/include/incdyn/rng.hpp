#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace incdyn {

/// splitmix64 mixing step; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic RNG with explicit normal/uniform draws (no distribution
/// caching beyond the Box-Muller spare, so streams replay identically).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Substream for grid cell `cell` of master seed `seed`. Cells are
    /// statistically independent and independent of evaluation order.
    static Rng substream(std::uint64_t seed, std::uint64_t cell) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s = a ^ (0x9e3779b97f4a7c15ULL * (cell + 1));
        std::uint64_t b = splitmix64(s);
        return Rng(b);
    }

    /// Nested substream, e.g. (seed, cell, repetition).
    static Rng substream(std::uint64_t seed, std::uint64_t cell, std::uint64_t sub) {
        std::uint64_t s = seed ^ (0xd1342543de82ef95ULL * (cell + 1));
        std::uint64_t a = splitmix64(s);
        s = a ^ (0xaf251af3b0f025b5ULL * (sub + 1));
        return Rng(splitmix64(s));
    }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // modulo bias negligible for n << 2^64
        return gen_() % n;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    int sign() { return (gen_() & 1u) ? 1 : -1; }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace incdyn
