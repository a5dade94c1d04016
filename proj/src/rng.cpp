#include "sgf/rng.hpp"

#include <cmath>
#include <numbers>

namespace sgf {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ stream);
  h = mix64(h ^ a);
  return mix64(h ^ b);
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  return double(counter_hash(seed, stream, a, b) >> 11) * 0x1.0p-53;
}

double std_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t mode) {
  // Box-Muller on two decorrelated counters; u1 is kept away from zero.
  const std::uint64_t base = counter_hash(seed, path, step, mode);
  const double u1 = (double(mix64(base ^ 0x1ULL) >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = double(mix64(base ^ 0x2ULL) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double BrownianPath::increment(long step, int mode) const {
  const long sub = 1L << refine;
  const double sd = std::sqrt(dt / double(sub));
  double s = 0.0;
  for (long i = 0; i < sub; ++i)
    s += std_normal(seed, path_id + 1, static_cast<std::uint64_t>(step * sub + i), static_cast<std::uint64_t>(mode));
  return sd * s;
}

}  // namespace sgf
