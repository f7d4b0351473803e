#include "advisor/suggesters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "advisor/error.hpp"

namespace advisor {

void SuggesterSpec::validate() const {
  if (types.empty()) throw Error(ErrorCode::InvalidArgument, "suggester spec has no types");
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (!(types[i] >= 0.0) || !std::isfinite(types[i])) {
      throw Error(ErrorCode::InvalidArgument, "type coefficients must be finite and >= 0");
    }
    if (i > 0 && !(types[i] > types[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "types must be strictly increasing");
    }
  }
  if (!(t_p >= 0.0 && t_p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "t_p must lie in [0, 1]");
  if (t_p > 0.0 && types.size() < 2) {
    throw Error(ErrorCode::SingleTypeDynamic, "t_p > 0 needs at least two types");
  }
  if (prior.size() != types.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prior length differs from type count");
  }
  double total = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "prior entries must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "prior must sum to 1");
}

SuggesterSpec SuggesterSpec::singleton(double lambda) { return {{lambda}, 0.0, {1.0}}; }

SuggesterSpec SuggesterSpec::standard(double t_p) {
  return {{0.0, 1.0, 2.0, 5.0, 10.0}, t_p, {0.1, 0.2, 0.4, 0.2, 0.1}};
}

std::vector<double> suggestion_distribution(std::span<const double> q, double lambda,
                                            std::span<const char> mask) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  const bool masked = !mask.empty();
  if (masked && mask.size() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mask length differs from Q row");
  }
  std::vector<double> p(q.size(), 0.0);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!masked || !mask[i]) top = std::max(top, q[i]);
  }
  if (!std::isfinite(top)) throw Error(ErrorCode::InvalidArgument, "Q row has no finite entry");
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (masked && mask[i]) continue;
    p[i] = lambda == 0.0 ? 1.0 : std::exp(lambda * (q[i] - top));
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> suggestion_distribution(const QTable& q, Index s, double lambda) {
  return suggestion_distribution(q.row(s), lambda);
}

std::vector<double> type_transition_matrix(const SuggesterSpec& spec) {
  const std::size_t m = spec.size();
  if (spec.t_p > 0.0 && m < 2) throw Error(ErrorCode::SingleTypeDynamic, "t_p > 0 with one type");
  std::vector<double> p(m * m, 0.0);
  const double off = m > 1 ? spec.t_p / static_cast<double>(m - 1) : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) p[i * m + j] = i == j ? 1.0 - spec.t_p : off;
  }
  return p;
}

std::size_t mixing_steps(const SuggesterSpec& spec, double tv_target) {
  if (spec.t_p <= 0.0) throw Error(ErrorCode::NoMixing, "t_p = 0 never mixes");
  if (!(tv_target > 0.0 && tv_target < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tv_target must lie in (0, 1)");
  }
  const std::size_t m = spec.size();
  const auto p = type_transition_matrix(spec);
  const double uniform = 1.0 / static_cast<double>(m);
  // rows[i] is delta_i P^t.
  std::vector<double> rows(m * m, 0.0), next(m * m);
  for (std::size_t i = 0; i < m; ++i) rows[i * m + i] = 1.0;
  for (std::size_t t = 1; t <= 1000000; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        const double w = rows[i * m + k];
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) next[i * m + j] += w * p[k * m + j];
      }
    }
    rows.swap(next);
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double tv = 0.0;
      for (std::size_t j = 0; j < m; ++j) tv += std::abs(rows[i * m + j] - uniform);
      worst = std::max(worst, 0.5 * tv);
    }
    if (worst < tv_target) return t;
  }
  throw Error(ErrorCode::NoMixing, "no mixing within 10^6 steps");
}

Suggestion sample_suggestion(const QTable& q, Index s, double lambda_true, Rng& rng) {
  const auto p = suggestion_distribution(q, s, lambda_true);
  return Suggestion::of(rng.categorical(std::span<const double>(p)));
}

void LambdaSchedule::validate() const {
  if (segments.empty()) throw Error(ErrorCode::InvalidArgument, "schedule has no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!(segments[i].second >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda* must be >= 0");
    if (i > 0 && segments[i].first <= segments[i - 1].first) {
      throw Error(ErrorCode::InvalidArgument, "schedule thresholds must strictly increase");
    }
  }
}

double lambda_at(const LambdaSchedule& schedule, std::size_t trial_index) {
  if (schedule.segments.empty()) throw Error(ErrorCode::InvalidArgument, "schedule has no segments");
  double value = schedule.segments.front().second;
  for (const auto& [threshold, lambda] : schedule.segments) {
    if (trial_index >= threshold) value = lambda;
  }
  return value;
}

Suggestion heuristic_suggest(const WallSensor& sensor, GridCell agent, GridCell opponent) {
  auto in_north = [&](GridCell c) { return c.row >= sensor.rows - sensor.width; };
  auto in_west = [&](GridCell c) { return c.col < sensor.width; };
  auto in_east = [&](GridCell c) { return c.col >= sensor.columns - sensor.width; };
  if (in_north(opponent) && !in_north(agent)) return Suggestion::of(sensor.north);
  if (in_west(opponent) && !in_west(agent)) return Suggestion::of(sensor.west);
  if (in_east(opponent) && !in_east(agent)) return Suggestion::of(sensor.east);
  return Suggestion::absent();
}

}  // namespace advisor
