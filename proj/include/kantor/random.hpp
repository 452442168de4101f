#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random streams: every (seed, n, replication, tag) key maps to an
// independent SplitMix64 sequence, so a replication draws the same numbers no
// matter which thread runs it or in what order.

namespace kantor {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t n, std::uint64_t replication, std::uint64_t tag)
        : state_(splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ n) ^ replication) ^ tag)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    // Box-Muller; the second variate of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace kantor
