#include "advisor/policy.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "advisor/error.hpp"

namespace advisor {

void AlphaSet::add(std::span<const double> alpha, Index action) {
  values.insert(values.end(), alpha.begin(), alpha.end());
  actions.push_back(action);
}

void AlphaSet::remove_if_flagged(const std::vector<char>& drop) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (drop[i]) continue;
    if (out != i) {
      std::copy(values.begin() + i * dim, values.begin() + (i + 1) * dim,
                values.begin() + out * dim);
      actions[out] = actions[i];
    }
    ++out;
  }
  actions.resize(out);
  values.resize(out * dim);
}

std::size_t AlphaPolicy::vector_count() const {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.size();
  return n;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

namespace {

constexpr double kTieTolerance = 1e-10;

struct Best {
  double value;
  Index action;
};

Best best_vector(const AlphaPolicy& policy, const FactoredBelief& b) {
  if (b.x >= policy.sets.size() || policy.sets[b.x].size() == 0) {
    throw Error(ErrorCode::NoVectors, "no alpha vectors at visible state " + std::to_string(b.x));
  }
  const AlphaSet& set = policy.sets[b.x];
  std::vector<Index> support;
  for (Index y = 0; y < b.b_y.size(); ++y) {
    if (b.b_y[y] != 0.0) support.push_back(y);
  }
  std::vector<double> values(set.size());
  double max_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double* alpha = set.values.data() + i * set.dim;
    double v = 0.0;
    for (Index y : support) v += alpha[y] * b.b_y[y];
    values[i] = v;
    max_value = std::max(max_value, v);
  }
  Best best{max_value, std::numeric_limits<Index>::max()};
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (values[i] >= max_value - kTieTolerance) best.action = std::min(best.action, set.actions[i]);
  }
  return best;
}

}  // namespace

double belief_value(const AlphaPolicy& policy, const FactoredBelief& b) {
  return best_vector(policy, b).value;
}

Index greedy_action(const AlphaPolicy& policy, const FactoredBelief& b) {
  return best_vector(policy, b).action;
}

double point_value(const AlphaPolicy& policy, Index x, Index y) {
  if (x >= policy.sets.size() || policy.sets[x].size() == 0) {
    throw Error(ErrorCode::NoVectors, "no alpha vectors at visible state " + std::to_string(x));
  }
  const AlphaSet& set = policy.sets[x];
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < set.size(); ++i) best = std::max(best, set.values[i * set.dim + y]);
  return best;
}

}  // namespace advisor
