#pragma once

#include <cmath>
#include <cstdint>

#include "dalab/common.hpp"

namespace dalab {

/// Counter-free splitmix64 step; also used to hash (seed, stream) pairs so
/// that per-member streams are independent of thread count and draw order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Small deterministic RNG stream. Normal variates use Box-Muller on explicit
/// uniform bits, so sequences are pinned by (seed, stream_id) alone.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s = a ^ (stream_id * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL);
        state_ = splitmix64(s);
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in (0,1); never returns exactly 0 so log() is safe.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double c = std::cos(two_pi * u2);
        double sn = std::sin(two_pi * u2);
        spare_ = r * sn;
        have_spare_ = true;
        return r * c;
    }

    complexd complex_normal() {
        double a = normal();
        double b = normal();
        return {a, b};
    }

  private:
    std::uint64_t state_;
    bool have_spare_;
    double spare_;
};

}  // namespace dalab
