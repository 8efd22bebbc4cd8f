#pragma once

#include <cstdint>

namespace hyperlq {

/// Counter-based generator: draw i of stream s under seed k depends only on
/// (k, s, i), so results do not depend on evaluation order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  /// Uniform on (0, 1).
  double uniform();
  double normal();
  /// +1 or -1.
  double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

std::uint64_t SplitMix64(std::uint64_t x);

}  // namespace hyperlq
