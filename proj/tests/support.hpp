#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"

namespace homax::testing {

/// Seeded generator for property checks.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Runs `body` for `cases` derived seeds; a failure message names the seed to replay.
inline void for_all(std::uint64_t seed, int cases, const std::function<void(Gen&)>& body) {
  for (int c = 0; c < cases; ++c) {
    const std::uint64_t s = seed * 1000003ULL + static_cast<std::uint64_t>(c);
    Gen g(s);
    INFO("property case seed = " << s);
    body(g);
  }
}

}  // namespace homax::testing
