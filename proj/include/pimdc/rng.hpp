#pragma once

#include <cmath>
#include <cstdint>

namespace pimdc {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer; full avalanche on 64 bits.
inline std::uint64_t mix_bits(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

// Asymmetric in (seed, value) so swapping stages cannot collide.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) {
  return mix_bits(seed + kGolden + value * 0xff51afd7ed558ccdull);
}

// Stream identity for one (sweep point, trial, sample, layer) cell. Streams
// are derived independently of execution order, so sweeps can run trials and
// samples on any number of threads and still reproduce bit-identical results.
struct SeedTuple {
  std::uint64_t master = 0;
  std::uint64_t axis = 0;
  std::uint64_t trial = 0;
  std::uint64_t sample = 0;
  std::uint64_t layer = 0;

  std::uint64_t derive() const {
    std::uint64_t s = mix_bits(master ^ kGolden);
    s = mix_seed(s, axis);
    s = mix_seed(s, trial);
    s = mix_seed(s, sample);
    s = mix_seed(s, layer);
    return s;
  }
};

// Deterministic standard-normal generator: splitmix64 counter underneath,
// Box-Muller on top. Self-contained so a stream's output depends only on its
// seed, never on how many values other streams consumed.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

  static GaussianStream from_tuple(const SeedTuple& t) {
    return GaussianStream(t.derive());
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix_bits(state_);
  }

  // Uniform in (0, 1]; never 0 so log() below is safe.
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pimdc
