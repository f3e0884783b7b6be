#pragma once

#include <cstdint>
#include <cmath>

namespace pathgibbs {

// Counter-based pseudo-random stream. Each (seed, stream) pair addresses an
// independent sequence; the state is just a counter, so a worker can be handed
// its own stream id and sampling stays reproducible no matter how work is
// scheduled. The generator is a 64-bit mixing function (splitmix-style
// finalizer) applied to seed/stream/counter.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream ^ 0x9e3779b97f4a7c15ULL))), counter_(0),
          have_cached_gaussian_(false), cached_gaussian_(0.0) {}

    std::uint64_t seed_key() const { return key_; }

    std::uint64_t next_u64() {
        std::uint64_t c = counter_++;
        return mix(key_ + c * 0x9e3779b97f4a7c15ULL);
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Consumes exactly two uniforms per pair,
    // so counter advancement is deterministic.
    double next_gaussian() {
        if (have_cached_gaussian_) {
            have_cached_gaussian_ = false;
            return cached_gaussian_;
        }
        double u1 = 1.0 - next_double();  // in (0,1], keeps log finite
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_gaussian_ = r * std::sin(a);
        have_cached_gaussian_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_;
    bool have_cached_gaussian_;
    double cached_gaussian_;
};

} // namespace pathgibbs
