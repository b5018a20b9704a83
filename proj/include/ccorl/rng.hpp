#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>

namespace ccorl {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seedable, splittable generator. The engine is std::mt19937_64 (fully
// specified by the standard); the distributions below are implemented here
// because the standard library's are not portable across vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], unbiased (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  // Child generator whose seed depends only on this generator's seed and
  // the stream path, never on how many values have been drawn.
  Rng split(std::uint64_t stream) const;
  Rng split(std::initializer_list<std::uint64_t> path) const;

  std::uint64_t seed() const { return seed_; }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j = uniform_int(0, static_cast<std::int64_t>(i));
      using std::swap;
      swap(first[i], first[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace ccorl
