#include "advisor/random.hpp"

namespace advisor {

std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return mix_seed(mix_seed(mix_seed(seed) ^ stream) ^ index);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling on the raw engine output.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

Index Rng::categorical(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  double u = uniform() * total;
  Index last = 0;
  for (Index i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last = i;
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  return last;
}

Index Rng::categorical(std::span<const Entry> row) {
  double total = 0.0;
  for (const Entry& e : row) total += e.prob;
  double u = uniform() * total;
  Index last = row.empty() ? 0 : row.front().index;
  for (const Entry& e : row) {
    if (e.prob <= 0.0) continue;
    last = e.index;
    if (u < e.prob) return e.index;
    u -= e.prob;
  }
  return last;
}

StateSample sample_initial(const MomdpModel& model, Rng& rng) {
  const auto& init = model.initial();
  double total = 0.0;
  for (const FlatEntry& e : init) total += e.prob;
  double u = rng.uniform() * total;
  for (const FlatEntry& e : init) {
    if (u < e.prob) return {e.x, e.y};
    u -= e.prob;
  }
  return {init.back().x, init.back().y};
}

StateSample sample_successor(const MomdpModel& model, Index a, Index x, Index y, Rng& rng) {
  const auto branches = model.branches(a, x, y);
  double u = rng.uniform();
  const Branch* pick = &branches.back();
  for (const Branch& b : branches) {
    if (u < b.prob) {
      pick = &b;
      break;
    }
    u -= b.prob;
  }
  return {pick->x_next, rng.categorical(model.hidden(*pick))};
}

Index sample_observation(const MomdpModel& model, Index a, Index x_next, Index y_next, Rng& rng) {
  return rng.categorical(model.observation_row(a, x_next, y_next));
}

}  // namespace advisor
