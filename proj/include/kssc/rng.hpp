#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace kssc {

/// Counter-based SplitMix64 stream. Output i is a pure function of
/// (seed, stream, i), so sequences are reproducible across platforms and
/// independent streams can be split off per task (per cluster, per restart,
/// per trial) without coordination.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(mix(seed) + 0x9e3779b97f4a7c15ULL * (stream + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n = 0 yields 0.
    std::uint64_t next_below(std::uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    /// Standard normal via Box-Muller. Pairs are cached, so draws alternate
    /// between consuming two uniforms and none.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // (0, 1] to keep the log finite
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace kssc
