#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace lqrpg {

// Seeded counter-based generator (splitmix64 core). Substreams are derived
// by mixing arbitrary stream identifiers into the seed, so independent
// components (epoch, sub-epoch, worker) can draw without coordination and
// runs stay bit-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ kGolden)) {}

  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) : Rng(seed) {
    for (std::uint64_t id : stream) state_ = mix(state_ ^ mix(id + kGolden));
  }

  // Derive an independent substream without disturbing this generator.
  Rng substream(std::uint64_t id) const {
    Rng r(0);
    r.state_ = mix(state_ ^ mix(id + kGolden));
    r.has_spare_ = false;
    return r;
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (implementation-pinned for
  // cross-platform bit reproducibility, unlike std::normal_distribution).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = mag * std::sin(two_pi * u2);
    has_spare_ = true;
    return mag * std::cos(two_pi * u2);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lqrpg
