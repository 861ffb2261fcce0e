#pragma once

#include <cmath>
#include <cstdint>

namespace psslab {

// Splittable counter-based stream in the style of SplittableRandom:
// state advances along a Weyl sequence and each output is a strong mix of the
// counter. Substreams are derived by key, never by jumping, so replication i
// of run s is reproducible in isolation.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream = 0) {
    state_ = mix(seed + kGolden * (stream + 1));
    gamma_ = mix_gamma(mix(state_ + kGolden) ^ mix(stream));
  }

  uint64_t next_u64() {
    state_ += gamma_;
    return mix(state_);
  }

  // Uniform on [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); safe under log().
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) {
    return -std::log1p(-next_double()) / rate;
  }

  // Independent substream derived from this stream's identity and a key.
  RngStream split(uint64_t key) const {
    RngStream child(0);
    child.state_ = mix(state_ ^ mix(key + kGolden));
    child.gamma_ = mix_gamma(gamma_ ^ mix(key));
    return child;
  }

 private:
  static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static uint64_t mix_gamma(uint64_t z) {
    z = mix(z) | 1ULL;  // gammas must be odd
    if (__builtin_popcountll(z ^ (z >> 1)) < 24) z ^= 0xaaaaaaaaaaaaaaaaULL;
    return z;
  }

  uint64_t state_;
  uint64_t gamma_;
};

}  // namespace psslab
