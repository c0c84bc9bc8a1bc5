#pragma once

// Deterministic counter-based random streams. Every consumer derives its own
// stream from (seed, stream id), so results are independent of evaluation
// order and thread scheduling, and identical across runs.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace roughbsde {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RandomStream {
  public:
    RandomStream(uint64_t seed, uint64_t stream_id) {
        state_ = seed ^ 0x6a09e667f3bcc909ULL;
        splitmix64(state_);
        state_ ^= stream_id * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL;
        splitmix64(state_);
    }

    // uniform in (0, 1]
    double uniform() {
        return (splitmix64(state_) >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // standard normal via Box-Muller; pinned here rather than relying on the
    // library's unspecified normal_distribution algorithm
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    uint64_t state_ = 0;
    bool have_spare_ = false;
    double spare_ = 0;
};

}  // namespace roughbsde
