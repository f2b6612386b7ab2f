#pragma once

// Portable seeded randomness: identical streams on every platform and
// standard library.

#include <cmath>
#include <cstdint>

namespace revelio::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b * 0xD1B54A32D192ED03ull);
    return splitmix64(s);
}

/// Standard normal pairs by the Marsaglia polar method over splitmix64;
/// portable across standard libraries, unlike std::normal_distribution.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-52 - 1.0;
            v = static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-52 - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Uniform integer in [0, bound] from splitmix64 (bias below 2^-40 for the
/// ranges used here).
inline std::uint64_t uniform_index(std::uint64_t& state, std::uint64_t bound) {
    return splitmix64(state) % (bound + 1);
}

} // namespace revelio::detail
