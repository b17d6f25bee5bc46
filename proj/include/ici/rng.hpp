#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace ici {

// Deterministic RNG wrapper. All randomness in the toolkit flows through this
// so that identical seeds give identical runs.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t u64() { return eng_(); }

    // Uniform in [0, n). n must be > 0.
    uint64_t below(uint64_t n) { return eng_() % n; }

    // Uniform in [0, 1).
    double real01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return real01() < p; }

    // Cycles until the next success of a per-cycle Bernoulli(p), inclusive.
    // Returns a huge sentinel for p <= 0 (never fires).
    uint64_t geometric_gap(double p) {
        if (p <= 0.0) return no_event;
        if (p >= 1.0) return 1;
        double u = real01();
        double g = std::floor(std::log1p(-u) / std::log1p(-p));
        if (g > 1e15) return no_event;
        return 1 + static_cast<uint64_t>(g);
    }

    static constexpr uint64_t no_event = std::numeric_limits<uint64_t>::max() / 4;

private:
    std::mt19937_64 eng_;
};

// Stable mixing of a base seed with stream labels (family index, size, ...),
// so sweep points get independent but reproducible streams.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t x = a + 0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2);
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27; x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

} // namespace ici
