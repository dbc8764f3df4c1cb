#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace spheresel {

// Seeded random source used everywhere in the library. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// distributions are hand-rolled because the <random> distribution objects
// are implementation-defined and would break bitwise reproducibility of
// checkpoints and reports across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform index in [0, n). Modulo bias is ~2^-64 per draw, irrelevant here.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(engine_() % static_cast<std::uint64_t>(n));
    }

    // Standard normal via Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // In-place Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

    // Derives a decorrelated child seed for an independent stream, so that
    // e.g. parameter init and epoch shuffling do not share a sequence.
    std::uint64_t derive(std::uint64_t salt) {
        std::uint64_t x = base_salted(salt);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
        Rng r(seed);
        return r.derive(salt);
    }

private:
    std::uint64_t base_salted(std::uint64_t salt) {
        // splitmix64 increment keeps distinct salts far apart.
        return seed_snapshot() + salt * 0x9e3779b97f4a7c15ULL;
    }

    std::uint64_t seed_snapshot() {
        // mt19937_64 does not expose its seed; draw one value from a copy so
        // derive() does not disturb this stream.
        std::mt19937_64 copy = engine_;
        return copy();
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace spheresel
