#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace prognosis {

// splitmix64 step, used for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic substream derivation: substreams for (seed, index) pairs are
// independent enough for tree/config/patient parallelism and identical on
// every platform.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base ^ (0xA0761D6478BD642Full + stream * 0xE7037ED1A0B428DBull);
    splitmix64(s);
    return splitmix64(s);
}

// Wrapper around mt19937_64 with self-contained distributions. The standard
// distribution objects are implementation-defined, so sampling is done by
// hand to keep byte-identical artifacts across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi], inclusive. Rejection sampling keeps the
    // draw unbiased and fully deterministic.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % range);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; only the cosine branch so one draw consumes two uniforms.
    double gaussian() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * 3.141592653589793238462643 * u2);
    }

    double exponential(double mean) {
        double u;
        do {
            u = uniform();
        } while (u >= 1.0);
        return -mean * std::log1p(-u);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace prognosis
