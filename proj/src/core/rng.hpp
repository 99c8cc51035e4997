#pragma once

// Counter-split SplitMix64 streams. Every source of randomness derives from
// (master seed, stream index); a fixed (seed, stream, draw count) triple
// yields the same value on every platform and under any thread count.

#include <cstdint>
#include <vector>

namespace cocylab {

inline uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream) {
    state_ = mix64(seed + 0x9e3779b97f4a7c15ull * (stream + 1));
    state_ = mix64(state_ ^ 0xbf58476d1ce4e5b9ull);
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // uniform in [0, 1), 53 bits
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // sample index from a cumulative distribution (cdf.back() ~ 1)
  int next_index(const std::vector<double>& cdf) {
    double u = next_unit();
    for (size_t i = 0; i + 1 < cdf.size(); ++i)
      if (u < cdf[i]) return static_cast<int>(i);
    return static_cast<int>(cdf.size()) - 1;
  }

 private:
  uint64_t state_;
};

}  // namespace cocylab
