#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "advisor/momdp.hpp"
#include "advisor/solver.hpp"
#include "advisor/suggesters.hpp"

namespace advisor {

/// Base model with hidden space Y x T. Hidden index y * |T| + k; composite
/// observation index o * symbols + sigma, with the last symbol for Absent.
struct TypedModel {
  MomdpModel model;
  MomdpModel base;
  SuggesterSpec spec;
  QTable q;
  bool per_step = true;

  std::size_t type_count() const { return spec.size(); }
  std::size_t env_y_count() const { return base.y_count(); }
  std::size_t symbols() const { return base.action_count() + 1; }
  Index absent_symbol() const { return static_cast<Index>(base.action_count()); }

  Index hidden(Index y_env, Index type) const {
    return y_env * static_cast<Index>(type_count()) + type;
  }
  Index env_of(Index y) const { return y / static_cast<Index>(type_count()); }
  Index type_of(Index y) const { return y % static_cast<Index>(type_count()); }
  Index observation(Index o, Suggestion sigma) const {
    return o * static_cast<Index>(symbols()) + (sigma.present() ? sigma.action : absent_symbol());
  }
  Index agent_observation(Index composite) const {
    return composite / static_cast<Index>(symbols());
  }
  Suggestion suggestion_of(Index composite) const;

  /// p(sigma | x, y_env, type), from the embedded suggestion tables.
  double suggestion_prob(Index x, Index y_env, Index type, Index sigma) const;

  std::vector<double> sigma_table;  // [((x * Y + y) * |T| + k) * |A| + sigma]
};

/// Adds a suggester-type coordinate to the hidden space. With `per_step`
/// the observation after every action carries a suggestion drawn at s';
/// otherwise non-ask observations carry Absent.
TypedModel augment_types(const MomdpModel& base, const SuggesterSpec& spec, const QTable& q,
                         bool per_step = true);

/// Joint update over (y, type). An Absent suggestion contributes no
/// evidence: the suggestion coordinate is marginalized out.
FactoredBelief joint_update(const MomdpModel& model, std::size_t symbols, const FactoredBelief& b,
                            Index a, Index x_next, Index o, Suggestion sigma);
FactoredBelief joint_update(const TypedModel& model, const FactoredBelief& b, Index a,
                            Index x_next, Index o, Suggestion sigma);
std::optional<FactoredBelief> try_joint_update(const MomdpModel& model, std::size_t symbols,
                                               const FactoredBelief& b, Index a, Index x_next,
                                               Index o, Suggestion sigma);

/// Multiplies b_y by p(sigma | x, y) without a transition. Returns nullopt
/// when the suggestion has zero likelihood; Absent leaves b unchanged.
std::optional<FactoredBelief> condition_on_suggestion(const TypedModel& model,
                                                      const FactoredBelief& b, Index x_base,
                                                      Suggestion sigma);

std::vector<double> type_marginal(const TypedModel& model, const FactoredBelief& b);
double expected_type(const TypedModel& model, const FactoredBelief& b);

/// Typed model with an ask action (last action index) and a visible ask
/// counter. Visible index x_base * levels + counter. An unlimited budget is
/// a single counter level that never decrements.
struct AskModel {
  MomdpModel model;
  TypedModel typed;
  double c_ask = 0.0;
  std::optional<std::size_t> n_ask;

  std::size_t levels() const { return n_ask ? *n_ask + 1 : 1; }
  Index ask_action() const { return static_cast<Index>(typed.base.action_count()); }
  Index visible(Index x_base, std::size_t counter) const {
    return x_base * static_cast<Index>(levels()) + (n_ask ? static_cast<Index>(counter) : 0);
  }
  Index base_x(Index x) const { return x / static_cast<Index>(levels()); }
  /// Remaining asks; nullopt when unlimited.
  std::optional<std::size_t> counter(Index x) const {
    if (!n_ask) return std::nullopt;
    return x % levels();
  }
};

/// Needs a base model with idle dynamics (the agent's step under a_ask).
/// Throws InvalidCost when c_ask > 0.
AskModel augment_ask(const TypedModel& typed, double c_ask, std::optional<std::size_t> n_ask);

}  // namespace advisor
