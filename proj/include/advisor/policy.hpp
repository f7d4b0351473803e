#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "advisor/momdp.hpp"

namespace advisor {

/// Alpha vectors over the hidden space for one visible state. Vectors are
/// stored row-major in `values` (one row of length `dim` per vector).
struct AlphaSet {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<Index> actions;

  std::size_t size() const { return actions.size(); }
  std::span<const double> vector(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  void add(std::span<const double> alpha, Index action);
  void remove_if_flagged(const std::vector<char>& drop);
};

struct SolveStats {
  double lower_bound = 0.0;  // at the initial belief
  double upper_bound = 0.0;
  double precision = 0.0;    // upper - lower at the initial belief
  std::size_t iterations = 0;
  std::size_t backups = 0;
  double wall_time = 0.0;    // seconds
  bool converged = false;
};

/// Lower-bound value function: one alpha set per visible state.
struct AlphaPolicy {
  std::size_t y_count = 0;
  std::vector<AlphaSet> sets;  // indexed by visible state
  SolveStats stats;

  std::size_t vector_count() const;
};

double dot(std::span<const double> a, std::span<const double> b);

/// max over alpha vectors at b.x of <alpha, b_y>. Throws NoVectors.
double belief_value(const AlphaPolicy& policy, const FactoredBelief& b);

/// Action of the maximizing vector; ties go to the lowest action index.
Index greedy_action(const AlphaPolicy& policy, const FactoredBelief& b);

/// Value at the point-mass belief on (x, y).
double point_value(const AlphaPolicy& policy, Index x, Index y);

}  // namespace advisor
