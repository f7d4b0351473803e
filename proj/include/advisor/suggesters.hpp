#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "advisor/momdp.hpp"
#include "advisor/random.hpp"
#include "advisor/solver.hpp"

namespace advisor {

/// Hypothesized rationality coefficients with a type-switch probability.
struct SuggesterSpec {
  std::vector<double> types;
  double t_p = 0.0;
  std::vector<double> prior;

  std::size_t size() const { return types.size(); }
  /// Throws InvalidArgument or SingleTypeDynamic.
  void validate() const;

  static SuggesterSpec singleton(double lambda);
  /// Types {0,1,2,5,10} with prior [0.1,0.2,0.4,0.2,0.1].
  static SuggesterSpec standard(double t_p = 0.0);
};

/// An action index, or no suggestion.
struct Suggestion {
  static constexpr Index kAbsent = std::numeric_limits<Index>::max();
  Index action = kAbsent;

  bool present() const { return action != kAbsent; }
  static Suggestion absent() { return {}; }
  static Suggestion of(Index a) { return {a}; }
  friend bool operator==(Suggestion, Suggestion) = default;
};

/// Softmax of lambda * q with max-subtraction. Entries flagged in `mask`
/// (when given) are excluded from the support.
std::vector<double> suggestion_distribution(std::span<const double> q, double lambda,
                                            std::span<const char> mask = {});
std::vector<double> suggestion_distribution(const QTable& q, Index s, double lambda);

/// Row-major |T| x |T| matrix: 1 - t_p on the diagonal, t_p / (|T| - 1) off it.
std::vector<double> type_transition_matrix(const SuggesterSpec& spec);

/// Smallest t with max over point-mass starts of TV(delta P^t, uniform) < tv_target.
std::size_t mixing_steps(const SuggesterSpec& spec, double tv_target);

Suggestion sample_suggestion(const QTable& q, Index s, double lambda_true, Rng& rng);

/// Trial-indexed piecewise-constant lambda*. Segment i covers
/// [threshold_i, threshold_{i+1}).
struct LambdaSchedule {
  std::vector<std::pair<std::size_t, double>> segments;

  void validate() const;
  static LambdaSchedule constant(double lambda) { return {{{0, lambda}}}; }
};

double lambda_at(const LambdaSchedule& schedule, std::size_t trial_index);

/// Wall-band sensor for the Tag grid: width in cells of each band and the
/// action emitted for it.
struct WallSensor {
  int width = 2;
  int columns = 10;
  int rows = 5;
  Index north = 0;
  Index west = 3;
  Index east = 2;
};

struct GridCell {
  int col;
  int row;
  friend bool operator==(GridCell, GridCell) = default;
};

/// Suggests moving toward the wall whose band holds the opponent when the
/// agent is outside that band. Precedence north, then west, then east.
Suggestion heuristic_suggest(const WallSensor& sensor, GridCell agent, GridCell opponent);

}  // namespace advisor
