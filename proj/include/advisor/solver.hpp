#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "advisor/momdp.hpp"
#include "advisor/policy.hpp"

namespace advisor {

struct SolveParams {
  double target_precision = 1e-2;  // upper - lower gap at the initial belief
  double time_budget = 300.0;      // seconds
  std::size_t max_backups = 0;     // 0: unlimited
  std::uint64_t rng_seed = 0;
  /// Called after every sampled trajectory with the current bounds.
  std::function<void(const SolveStats&)> on_progress;
};

/// Anytime point-based solver. Maintains a lower bound (alpha vectors,
/// seeded with fixed-action policies) and an upper bound (fast informed
/// bound corners plus sawtooth-interpolated belief points), and samples
/// belief trajectories toward large bound gaps until the gap at the
/// initial belief drops below `target_precision` or the budget runs out.
AlphaPolicy solve(const MomdpModel& model, const SolveParams& params = {});

/// Q(s, a) over flat states s = x * |Y| + y.
struct QTable {
  std::size_t x_count = 0;
  std::size_t y_count = 0;
  std::size_t action_count = 0;
  std::vector<double> values;  // [s * action_count + a]

  std::size_t state_count() const { return x_count * y_count; }
  double at(std::size_t s, std::size_t a) const { return values[s * action_count + a]; }
  std::span<const double> row(std::size_t s) const {
    return {values.data() + s * action_count, action_count};
  }
};

/// Q(s,a) = R(s,a) + discount * sum_s' T(s,a,s') V(s'), with V the policy's
/// point-mass value.
QTable extract_q(const MomdpModel& model, const AlphaPolicy& policy);

/// Optimal Q of the fully observable MDP over flat states.
QTable mdp_q(const MomdpModel& model, double tolerance = 1e-9, std::size_t max_iterations = 100000);

/// Fixed-action ("blind") policy values: [a][s], each a lower bound.
std::vector<std::vector<double>> blind_values(const MomdpModel& model,
                                              double tolerance = 1e-9,
                                              std::size_t max_iterations = 20000);

/// Fast informed bound Q over flat states, an upper bound on the optimum.
QTable fast_informed_bound(const MomdpModel& model, double tolerance = 1e-6,
                           std::size_t max_iterations = 5000, double time_limit = 1e30);

struct EvaluationResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t episodes = 0;
};

/// Monte-Carlo discounted return of the greedy policy from the initial
/// distribution. Deterministic for a given seed.
EvaluationResult evaluate_policy(const MomdpModel& model, const AlphaPolicy& policy,
                                 std::size_t episodes, std::size_t horizon, std::uint64_t seed);

/// Value of the policy at the model's initial distribution:
/// sum_x p(x) belief_value(initial_belief(x)).
double initial_value(const MomdpModel& model, const AlphaPolicy& policy);

}  // namespace advisor
