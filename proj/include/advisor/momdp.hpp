#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace advisor {

using Index = std::uint32_t;

/// One nonzero of a sparse probability row.
struct Entry {
  Index index;
  double prob;
};

using SparseRow = std::vector<Entry>;

/// A state over the joint space, used for initial distributions.
struct FlatEntry {
  Index x;
  Index y;
  double prob;
};

/// Builder-side description of one visible successor x' of (x, y, a):
/// t_x(x' | x, y, a) together with the row t_y(. | x, y, a, x').
struct BranchSpec {
  Index x_next;
  double prob;
  SparseRow hidden;
};

/// Stored form of a BranchSpec; `begin`/`end` index into the hidden entry pool.
struct Branch {
  Index x_next;
  double prob;
  std::uint32_t begin;
  std::uint32_t end;
};

/// Transition rows (a, x, y) -> branches, in compressed storage.
class TransitionTable {
 public:
  TransitionTable() = default;
  TransitionTable(std::size_t actions, std::size_t x_count, std::size_t y_count);

  std::span<const Branch> branches(Index a, Index x, Index y) const {
    const std::size_t row = (static_cast<std::size_t>(a) * x_count_ + x) * y_count_ + y;
    return {branches_.data() + row_start_[row], branches_.data() + row_start_[row + 1]};
  }
  std::span<const Entry> hidden(const Branch& b) const {
    return {hidden_.data() + b.begin, hidden_.data() + b.end};
  }
  std::size_t action_count() const { return actions_; }
  std::size_t nonzeros() const { return hidden_.size(); }

 private:
  friend class ModelBuilder;
  std::size_t actions_ = 0, x_count_ = 0, y_count_ = 0;
  std::vector<std::uint32_t> row_start_;
  std::vector<Branch> branches_;
  std::vector<Entry> hidden_;
};

/// Observation rows (a, x', y') -> distribution over observations.
class ObservationTable {
 public:
  ObservationTable() = default;
  ObservationTable(std::size_t actions, std::size_t x_count, std::size_t y_count);

  std::span<const Entry> row(Index a, Index x_next, Index y_next) const {
    const std::size_t r = (static_cast<std::size_t>(a) * x_count_ + x_next) * y_count_ + y_next;
    return {entries_.data() + row_start_[r], entries_.data() + row_start_[r + 1]};
  }
  double prob(Index a, Index x_next, Index y_next, Index o) const;

 private:
  friend class ModelBuilder;
  std::size_t actions_ = 0, x_count_ = 0, y_count_ = 0;
  std::vector<std::uint32_t> row_start_;
  std::vector<Entry> entries_;
};

/// Dynamics of a step in which the agent takes no environment action
/// (used by the ask transform): the agent's coordinates hold while
/// exogenous parts of the state keep evolving.
struct IdleDynamics {
  TransitionTable transitions;   // single action slot
  ObservationTable observations; // single action slot
};

struct ModelData;

/// Tabular mixed-observability model: visible states X, hidden states Y.
/// Immutable; copies share storage.
class MomdpModel {
 public:
  MomdpModel() = default;

  std::size_t x_count() const;
  std::size_t y_count() const;
  std::size_t action_count() const;
  std::size_t observation_count() const;
  const std::vector<std::string>& actions() const;
  const std::vector<std::string>& observations() const;
  double discount() const;

  std::span<const Branch> branches(Index a, Index x, Index y) const;
  std::span<const Entry> hidden(const Branch& b) const;
  std::span<const Entry> observation_row(Index a, Index x_next, Index y_next) const;
  double observation_prob(Index a, Index x_next, Index y_next, Index o) const;
  double reward(Index x, Index y, Index a) const;
  bool terminal(Index x, Index y) const;
  bool feasible(Index x, Index a) const;
  /// Lowest-index action feasible at x.
  Index first_feasible(Index x) const;
  const std::vector<FlatEntry>& initial() const;

  const IdleDynamics* idle() const;
  const TransitionTable& transition_table() const;
  const ObservationTable& observation_table() const;

  bool empty() const { return data_ == nullptr; }

 private:
  friend class ModelBuilder;
  std::shared_ptr<const ModelData> data_;
};

/// Mutable staging area for a MomdpModel. Rows left unset are empty.
class ModelBuilder {
 public:
  ModelBuilder(std::size_t x_count, std::size_t y_count, std::vector<std::string> actions,
               std::vector<std::string> observations, double discount);
  ~ModelBuilder();
  ModelBuilder(ModelBuilder&&) noexcept;
  ModelBuilder& operator=(ModelBuilder&&) noexcept;

  std::size_t x_count() const;
  std::size_t y_count() const;
  std::size_t action_count() const;
  std::size_t observation_count() const;

  void set_transition(Index a, Index x, Index y, std::vector<BranchSpec> branches);
  void set_observation(Index a, Index x_next, Index y_next, SparseRow row);
  void set_reward(Index x, Index y, Index a, double value);
  void set_terminal(Index x, Index y, bool terminal = true);
  void set_infeasible(Index x, Index a);
  void set_initial(std::vector<FlatEntry> initial);

  void enable_idle();
  void set_idle_transition(Index x, Index y, std::vector<BranchSpec> branches);
  void set_idle_observation(Index x_next, Index y_next, SparseRow row);

  MomdpModel build() &&;

 private:
  struct Staging;
  std::unique_ptr<Staging> s_;
};

/// Visible state plus a distribution over hidden states.
struct FactoredBelief {
  Index x = 0;
  std::vector<double> b_y;
};

struct Violation {
  std::string table;
  std::vector<std::size_t> indices;
  double residual = 0.0;
  std::string message;
};

std::vector<Violation> validate_model(const MomdpModel& model);

/// Unnormalized transition-predicted mass over y' restricted to x_next:
/// sum_y t_x(x_next|x,y,a) t_y(y'|x,y,a,x_next) b_y(y).
std::vector<double> predict_hidden(const MomdpModel& model, const FactoredBelief& b, Index a,
                                   Index x_next);

/// Bayes update of the hidden belief. Throws Error{ZeroLikelihood} when the
/// observation has (numerically) zero probability under the belief.
FactoredBelief belief_update(const MomdpModel& model, const FactoredBelief& b, Index a,
                             Index x_next, Index o);

std::optional<FactoredBelief> try_belief_update(const MomdpModel& model, const FactoredBelief& b,
                                                Index a, Index x_next, Index o);

/// The initial distribution conditioned on the visible state x.
FactoredBelief initial_belief(const MomdpModel& model, Index x);

/// Probability of each visible state under the model's initial distribution.
std::vector<double> initial_visible(const MomdpModel& model);

/// Threshold below which an unnormalized posterior counts as impossible.
inline constexpr double kZeroLikelihood = 1e-300;

/// Flat POMDP over S = X x Y, with s = x * |Y| + y.
class FlatPomdpView {
 public:
  explicit FlatPomdpView(const MomdpModel& model) : model_(&model) {}

  std::size_t state_count() const { return model_->x_count() * model_->y_count(); }
  Index state(Index x, Index y) const { return x * static_cast<Index>(model_->y_count()) + y; }
  Index x_of(Index s) const { return s / static_cast<Index>(model_->y_count()); }
  Index y_of(Index s) const { return s % static_cast<Index>(model_->y_count()); }

  /// Joint successor distribution T(s, a, .), merged and sorted by s'.
  SparseRow transition(Index s, Index a) const;
  double observation(Index a, Index s_next, Index o) const;
  double reward(Index s, Index a) const;
  bool terminal(Index s) const;
  std::vector<double> initial() const;

  const MomdpModel& model() const { return *model_; }

 private:
  const MomdpModel* model_;
};

}  // namespace advisor
