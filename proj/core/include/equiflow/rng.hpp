#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace equiflow {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Portable named random stream: a mt19937_64 seeded with
/// splitmix64(seed ^ fnv1a64(name)). Draws use only the raw 64-bit output, so
/// sequences do not depend on the standard library's distributions.
class RandomStream
{
public:
  RandomStream(std::uint64_t seed, std::string_view name);

  /// Uniform in [0, 1) with 53 random bits.
  double unit();
  /// Uniform in [lo, hi); lo when hi <= lo.
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

private:
  std::mt19937_64 engine_;
};

}  // namespace equiflow
