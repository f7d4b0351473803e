#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "advisor/momdp.hpp"

namespace advisor {

/// splitmix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t value);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform in [0, 1) built from the top 53 bits, so results do not depend
  /// on the standard library's distribution implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t below(std::uint64_t n);

  Index categorical(std::span<const double> probs);
  Index categorical(std::span<const Entry> row);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct StateSample {
  Index x;
  Index y;
};

StateSample sample_initial(const MomdpModel& model, Rng& rng);
StateSample sample_successor(const MomdpModel& model, Index a, Index x, Index y, Rng& rng);
Index sample_observation(const MomdpModel& model, Index a, Index x_next, Index y_next, Rng& rng);

}  // namespace advisor
