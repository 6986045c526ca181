#pragma once

#include <cstdint>
#include <random>

namespace asymcast {

/// Mixes a master seed with a stream index (splitmix64 finalizer). Used to
/// give every model fit, bag and tree its own reproducible stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Seeded generator with distribution code owned here rather than taken from
/// <random>, whose distributions are implementation-defined. Output is
/// identical across standard libraries for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace asymcast
