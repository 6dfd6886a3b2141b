#pragma once

#include <cstdint>
#include <vector>

// Deterministic random streams. The standard <random> engines are pinned by
// the standard but the distributions are not, so all variate generation is
// implemented here to keep seeded runs reproducible across toolchains.
namespace navgraph {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // splitmix64 warm-up decorrelates small seeds.
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n);

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape, double rate);
  double beta(double a, double b);
  double lognormal(double meanlog, double sdlog);

  // k distinct indices drawn uniformly from {0, ..., n-1}, in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k);

  // Derives an independent stream for a named component.
  Rng fork(std::uint64_t tag) const {
    Rng child(state_ ^ (0xA0761D6478BD642FULL * (tag + 1)));
    return child;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace navgraph
