#include <cmath>

#include "advisor/error.hpp"
#include "advisor/random.hpp"
#include "advisor/solver.hpp"

namespace advisor {

double initial_value(const MomdpModel& model, const AlphaPolicy& policy) {
  const std::vector<double> px = initial_visible(model);
  double v = 0.0;
  for (Index x = 0; x < px.size(); ++x) {
    if (px[x] > 0.0) v += px[x] * belief_value(policy, initial_belief(model, x));
  }
  return v;
}

EvaluationResult evaluate_policy(const MomdpModel& model, const AlphaPolicy& policy,
                                 std::size_t episodes, std::size_t horizon, std::uint64_t seed) {
  if (episodes == 0) throw Error(ErrorCode::InvalidArgument, "episodes must be at least 1");
  const double gamma = model.discount();
  // Welford accumulation; exact zero spread when all returns agree.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    Rng rng(derive_seed(seed, 0x65766131, ep));
    StateSample s = sample_initial(model, rng);
    FactoredBelief b = initial_belief(model, s.x);
    double ret = 0.0, disc = 1.0;
    for (std::size_t t = 0; t < horizon && !model.terminal(s.x, s.y); ++t) {
      const Index a = greedy_action(policy, b);
      ret += disc * model.reward(s.x, s.y, a);
      disc *= gamma;
      const StateSample next = sample_successor(model, a, s.x, s.y, rng);
      const Index o = sample_observation(model, a, next.x, next.y, rng);
      auto post = try_belief_update(model, b, a, next.x, o);
      if (post) {
        b = std::move(*post);
      } else {
        // Fall back to the transition-predicted prior.
        std::vector<double> pred = predict_hidden(model, b, a, next.x);
        double total = 0.0;
        for (double p : pred) total += p;
        for (double& p : pred) p /= total;
        b = FactoredBelief{next.x, std::move(pred)};
      }
      s = next;
    }
    const double delta = ret - mean;
    mean += delta / static_cast<double>(ep + 1);
    m2 += delta * (ret - mean);
  }
  const double n = static_cast<double>(episodes);
  const double var = episodes > 1 ? m2 / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n), episodes};
}

}  // namespace advisor
