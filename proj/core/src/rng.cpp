#include "equiflow/rng.hpp"

namespace equiflow {

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t seed, std::string_view name) : engine_(splitmix64(seed ^ fnv1a64(name))) {}

double RandomStream::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomStream::uniform(double lo, double hi) { return hi > lo ? lo + (hi - lo) * unit() : lo; }

std::uint64_t RandomStream::below(std::uint64_t n)
{
  if (n <= 1) return 0;
  const auto k = static_cast<std::uint64_t>(unit() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

}  // namespace equiflow
