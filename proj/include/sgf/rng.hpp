#pragma once

#include <cstdint>

namespace sgf {

// Counter-based draws: every value is a pure function of its key, so paths can be
// regenerated bit-exactly and in any order.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b);
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b);
double std_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t mode);

// Increments of K independent Brownian motions for one path. With refine = r, each
// step of size dt sums 2^r finer normals, so a run at dt with refine = 1 sees exactly
// the path of a run at dt/2 with refine = 0.
struct BrownianPath {
  std::uint64_t seed = 0;
  std::uint64_t path_id = 0;
  double dt = 0.0;
  int refine = 0;
  double increment(long step, int mode) const;
};

}  // namespace sgf
