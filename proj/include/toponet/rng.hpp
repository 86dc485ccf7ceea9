#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace toponet {

// Deterministic random source: std::mt19937_64 (whose output sequence is fully
// specified by the standard) plus explicit transforms, so streams are
// bit-identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller; the second deviate is cached.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - u keeps the argument of log strictly positive.
        const double u = 1.0 - next_double();
        const double v = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u));
        const double theta = 2.0 * 3.14159265358979323846 * v;
        spare_ = radius * std::sin(theta);
        has_spare_ = true;
        return radius * std::cos(theta);
    }

    // Uniform index in [0, n) by rejection (no modulo bias).
    std::size_t next_index(std::size_t n) {
        const std::uint64_t threshold = (-static_cast<std::uint64_t>(n)) % n;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return static_cast<std::size_t>(r % n);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Sub-stream seeds: master * 1,000,003 + index. Documented so runs can be
// reproduced unit by unit.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return master * 1000003ULL + index;
}

}  // namespace toponet
