#include "hyperlq/random.hpp"

#include <cmath>

namespace hyperlq {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t key = SplitMix64(seed_ ^ SplitMix64(stream_ + 0x632be59bd9b4e019ULL));
  return SplitMix64(key + 0x9e3779b97f4a7c15ULL * (counter_++));
}

double CounterRng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  // Box-Muller, one variate per pair so the counter advance is fixed.
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace hyperlq
