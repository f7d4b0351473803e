#include "advisor/momdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "advisor/error.hpp"

namespace advisor {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroLikelihood: return "ZeroLikelihood";
    case ErrorCode::NoVectors: return "NoVectors";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleTypeDynamic: return "SingleTypeDynamic";
    case ErrorCode::NoMixing: return "NoMixing";
    case ErrorCode::InvalidCost: return "InvalidCost";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::PolicyNotFound: return "PolicyNotFound";
    case ErrorCode::BridgeTimeout: return "BridgeTimeout";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

struct ModelData {
  std::size_t x_count = 0;
  std::size_t y_count = 0;
  std::vector<std::string> actions;
  std::vector<std::string> observations;
  double discount = 0.0;
  TransitionTable transitions;
  ObservationTable observations_table;
  std::vector<double> reward;          // [(x * Y + y) * A + a]
  std::vector<std::uint8_t> terminal;  // [x * Y + y]
  std::vector<std::uint8_t> feasible;  // [x * A + a]
  std::vector<FlatEntry> initial;
  std::optional<IdleDynamics> idle;
};

TransitionTable::TransitionTable(std::size_t actions, std::size_t x_count, std::size_t y_count)
    : actions_(actions), x_count_(x_count), y_count_(y_count),
      row_start_(actions * x_count * y_count + 1, 0) {}

ObservationTable::ObservationTable(std::size_t actions, std::size_t x_count, std::size_t y_count)
    : actions_(actions), x_count_(x_count), y_count_(y_count),
      row_start_(actions * x_count * y_count + 1, 0) {}

double ObservationTable::prob(Index a, Index x_next, Index y_next, Index o) const {
  for (const Entry& e : row(a, x_next, y_next)) {
    if (e.index == o) return e.prob;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// MomdpModel accessors

std::size_t MomdpModel::x_count() const { return data_->x_count; }
std::size_t MomdpModel::y_count() const { return data_->y_count; }
std::size_t MomdpModel::action_count() const { return data_->actions.size(); }
std::size_t MomdpModel::observation_count() const { return data_->observations.size(); }
const std::vector<std::string>& MomdpModel::actions() const { return data_->actions; }
const std::vector<std::string>& MomdpModel::observations() const { return data_->observations; }
double MomdpModel::discount() const { return data_->discount; }

std::span<const Branch> MomdpModel::branches(Index a, Index x, Index y) const {
  return data_->transitions.branches(a, x, y);
}
std::span<const Entry> MomdpModel::hidden(const Branch& b) const {
  return data_->transitions.hidden(b);
}
std::span<const Entry> MomdpModel::observation_row(Index a, Index x_next, Index y_next) const {
  return data_->observations_table.row(a, x_next, y_next);
}
double MomdpModel::observation_prob(Index a, Index x_next, Index y_next, Index o) const {
  return data_->observations_table.prob(a, x_next, y_next, o);
}
double MomdpModel::reward(Index x, Index y, Index a) const {
  return data_->reward[(static_cast<std::size_t>(x) * data_->y_count + y) * action_count() + a];
}
bool MomdpModel::terminal(Index x, Index y) const {
  return data_->terminal[static_cast<std::size_t>(x) * data_->y_count + y] != 0;
}
bool MomdpModel::feasible(Index x, Index a) const {
  return data_->feasible[static_cast<std::size_t>(x) * action_count() + a] != 0;
}
Index MomdpModel::first_feasible(Index x) const {
  for (Index a = 0; a < action_count(); ++a) {
    if (feasible(x, a)) return a;
  }
  return 0;
}
const std::vector<FlatEntry>& MomdpModel::initial() const { return data_->initial; }
const IdleDynamics* MomdpModel::idle() const {
  return data_->idle ? &*data_->idle : nullptr;
}
const TransitionTable& MomdpModel::transition_table() const { return data_->transitions; }
const ObservationTable& MomdpModel::observation_table() const {
  return data_->observations_table;
}

// ---------------------------------------------------------------------------
// ModelBuilder

struct ModelBuilder::Staging {
  std::size_t x_count, y_count;
  std::vector<std::string> actions, observations;
  double discount;
  std::vector<std::vector<BranchSpec>> transitions;  // [(a * X + x) * Y + y]
  std::vector<SparseRow> observations_rows;          // [(a * X + x') * Y + y']
  std::vector<double> reward;
  std::vector<std::uint8_t> terminal;
  std::vector<std::uint8_t> feasible;
  std::vector<FlatEntry> initial;
  bool idle = false;
  std::vector<std::vector<BranchSpec>> idle_transitions;
  std::vector<SparseRow> idle_observations;
};

ModelBuilder::ModelBuilder(std::size_t x_count, std::size_t y_count,
                           std::vector<std::string> actions,
                           std::vector<std::string> observations, double discount)
    : s_(std::make_unique<Staging>()) {
  const std::size_t a_count = actions.size();
  s_->x_count = x_count;
  s_->y_count = y_count;
  s_->actions = std::move(actions);
  s_->observations = std::move(observations);
  s_->discount = discount;
  s_->transitions.resize(a_count * x_count * y_count);
  s_->observations_rows.resize(a_count * x_count * y_count);
  s_->reward.assign(x_count * y_count * a_count, 0.0);
  s_->terminal.assign(x_count * y_count, 0);
  s_->feasible.assign(x_count * a_count, 1);
}

ModelBuilder::~ModelBuilder() = default;
ModelBuilder::ModelBuilder(ModelBuilder&&) noexcept = default;
ModelBuilder& ModelBuilder::operator=(ModelBuilder&&) noexcept = default;

std::size_t ModelBuilder::x_count() const { return s_->x_count; }
std::size_t ModelBuilder::y_count() const { return s_->y_count; }
std::size_t ModelBuilder::action_count() const { return s_->actions.size(); }
std::size_t ModelBuilder::observation_count() const { return s_->observations.size(); }

namespace {

void check_index(std::size_t value, std::size_t bound, const char* what) {
  if (value >= bound) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " index " + std::to_string(value) + " out of range " +
                    std::to_string(bound));
  }
}

}  // namespace

void ModelBuilder::set_transition(Index a, Index x, Index y, std::vector<BranchSpec> branches) {
  check_index(a, action_count(), "action");
  check_index(x, s_->x_count, "visible");
  check_index(y, s_->y_count, "hidden");
  for (const auto& b : branches) {
    check_index(b.x_next, s_->x_count, "visible successor");
    for (const auto& e : b.hidden) check_index(e.index, s_->y_count, "hidden successor");
  }
  s_->transitions[(static_cast<std::size_t>(a) * s_->x_count + x) * s_->y_count + y] =
      std::move(branches);
}

void ModelBuilder::set_observation(Index a, Index x_next, Index y_next, SparseRow row) {
  check_index(a, action_count(), "action");
  check_index(x_next, s_->x_count, "visible");
  check_index(y_next, s_->y_count, "hidden");
  for (const auto& e : row) check_index(e.index, observation_count(), "observation");
  s_->observations_rows[(static_cast<std::size_t>(a) * s_->x_count + x_next) * s_->y_count +
                        y_next] = std::move(row);
}

void ModelBuilder::set_reward(Index x, Index y, Index a, double value) {
  check_index(a, action_count(), "action");
  s_->reward[(static_cast<std::size_t>(x) * s_->y_count + y) * action_count() + a] = value;
}

void ModelBuilder::set_terminal(Index x, Index y, bool terminal) {
  s_->terminal[static_cast<std::size_t>(x) * s_->y_count + y] = terminal ? 1 : 0;
}

void ModelBuilder::set_infeasible(Index x, Index a) {
  check_index(a, action_count(), "action");
  s_->feasible[static_cast<std::size_t>(x) * action_count() + a] = 0;
}

void ModelBuilder::set_initial(std::vector<FlatEntry> initial) {
  for (const auto& e : initial) {
    check_index(e.x, s_->x_count, "visible");
    check_index(e.y, s_->y_count, "hidden");
  }
  s_->initial = std::move(initial);
}

void ModelBuilder::enable_idle() {
  if (s_->idle) return;
  s_->idle = true;
  s_->idle_transitions.resize(s_->x_count * s_->y_count);
  s_->idle_observations.resize(s_->x_count * s_->y_count);
}

void ModelBuilder::set_idle_transition(Index x, Index y, std::vector<BranchSpec> branches) {
  enable_idle();
  s_->idle_transitions[static_cast<std::size_t>(x) * s_->y_count + y] = std::move(branches);
}

void ModelBuilder::set_idle_observation(Index x_next, Index y_next, SparseRow row) {
  enable_idle();
  s_->idle_observations[static_cast<std::size_t>(x_next) * s_->y_count + y_next] = std::move(row);
}

MomdpModel ModelBuilder::build() && {
  auto data = std::make_shared<ModelData>();
  Staging& s = *s_;
  const std::size_t a_count = s.actions.size();

  auto fill_transitions = [&](TransitionTable& t, std::vector<std::vector<BranchSpec>>& rows) {
    std::size_t n_branches = 0, n_hidden = 0;
    for (const auto& row : rows) {
      n_branches += row.size();
      for (const auto& b : row) n_hidden += b.hidden.size();
    }
    t.branches_.reserve(n_branches);
    t.hidden_.reserve(n_hidden);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (auto& b : rows[r]) {
        const auto begin = static_cast<std::uint32_t>(t.hidden_.size());
        t.hidden_.insert(t.hidden_.end(), b.hidden.begin(), b.hidden.end());
        t.branches_.push_back(
            {b.x_next, b.prob, begin, static_cast<std::uint32_t>(t.hidden_.size())});
      }
      t.row_start_[r + 1] = static_cast<std::uint32_t>(t.branches_.size());
      rows[r].clear();
      rows[r].shrink_to_fit();
    }
  };
  auto fill_observations = [&](ObservationTable& t, std::vector<SparseRow>& rows) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      t.entries_.insert(t.entries_.end(), rows[r].begin(), rows[r].end());
      t.row_start_[r + 1] = static_cast<std::uint32_t>(t.entries_.size());
      rows[r].clear();
      rows[r].shrink_to_fit();
    }
  };

  data->x_count = s.x_count;
  data->y_count = s.y_count;
  data->discount = s.discount;
  data->transitions = TransitionTable(a_count, s.x_count, s.y_count);
  fill_transitions(data->transitions, s.transitions);
  data->observations_table = ObservationTable(a_count, s.x_count, s.y_count);
  fill_observations(data->observations_table, s.observations_rows);
  if (s.idle) {
    IdleDynamics idle{TransitionTable(1, s.x_count, s.y_count),
                      ObservationTable(1, s.x_count, s.y_count)};
    fill_transitions(idle.transitions, s.idle_transitions);
    fill_observations(idle.observations, s.idle_observations);
    data->idle = std::move(idle);
  }
  data->actions = std::move(s.actions);
  data->observations = std::move(s.observations);
  data->reward = std::move(s.reward);
  data->terminal = std::move(s.terminal);
  data->feasible = std::move(s.feasible);
  data->initial = std::move(s.initial);

  MomdpModel model;
  model.data_ = std::move(data);
  s_.reset();
  return model;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

constexpr double kRowTolerance = 1e-9;

void check_prob(std::vector<Violation>& out, const char* table, std::vector<std::size_t> idx,
                double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    out.push_back({table, std::move(idx), p < 0.0 ? p : p - 1.0, "probability outside [0, 1]"});
  }
}

void check_sum(std::vector<Violation>& out, const char* table, std::vector<std::size_t> idx,
               double sum) {
  if (std::abs(sum - 1.0) > kRowTolerance) {
    out.push_back({table, std::move(idx), sum - 1.0, "row does not sum to 1"});
  }
}

void validate_transitions(std::vector<Violation>& out, const TransitionTable& t,
                          std::size_t actions, std::size_t x_count, std::size_t y_count,
                          const char* tx_name, const char* ty_name) {
  for (Index a = 0; a < actions; ++a) {
    for (Index x = 0; x < x_count; ++x) {
      for (Index y = 0; y < y_count; ++y) {
        double sum_x = 0.0;
        for (const Branch& b : t.branches(a, x, y)) {
          check_prob(out, tx_name, {a, x, y, b.x_next}, b.prob);
          sum_x += b.prob;
          double sum_y = 0.0;
          for (const Entry& e : t.hidden(b)) {
            check_prob(out, ty_name, {a, x, y, b.x_next, e.index}, e.prob);
            sum_y += e.prob;
          }
          check_sum(out, ty_name, {a, x, y, b.x_next}, sum_y);
        }
        check_sum(out, tx_name, {a, x, y}, sum_x);
      }
    }
  }
}

void validate_observations(std::vector<Violation>& out, const ObservationTable& t,
                           std::size_t actions, std::size_t x_count, std::size_t y_count,
                           const char* name) {
  for (Index a = 0; a < actions; ++a) {
    for (Index x = 0; x < x_count; ++x) {
      for (Index y = 0; y < y_count; ++y) {
        double sum = 0.0;
        for (const Entry& e : t.row(a, x, y)) {
          check_prob(out, name, {a, x, y, e.index}, e.prob);
          sum += e.prob;
        }
        check_sum(out, name, {a, x, y}, sum);
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_model(const MomdpModel& model) {
  std::vector<Violation> out;
  const std::size_t A = model.action_count(), X = model.x_count(), Y = model.y_count();
  if (!(model.discount() >= 0.0 && model.discount() < 1.0)) {
    out.push_back({"discount", {}, model.discount(), "discount outside [0, 1)"});
  }
  validate_transitions(out, model.transition_table(), A, X, Y, "t_x", "t_y");
  validate_observations(out, model.observation_table(), A, X, Y, "obs");
  if (const IdleDynamics* idle = model.idle()) {
    validate_transitions(out, idle->transitions, 1, X, Y, "idle.t_x", "idle.t_y");
    validate_observations(out, idle->observations, 1, X, Y, "idle.obs");
  }

  for (Index x = 0; x < X; ++x) {
    for (Index y = 0; y < Y; ++y) {
      if (!model.terminal(x, y)) continue;
      for (Index a = 0; a < A; ++a) {
        if (model.reward(x, y, a) != 0.0) {
          out.push_back({"reward", {x, y, a}, model.reward(x, y, a),
                         "terminal state with nonzero reward"});
        }
        double self = 0.0;
        for (const Branch& b : model.branches(a, x, y)) {
          if (b.x_next != x) continue;
          for (const Entry& e : model.hidden(b)) {
            if (e.index == y) self += b.prob * e.prob;
          }
        }
        if (std::abs(self - 1.0) > kRowTolerance) {
          out.push_back({"terminal", {a, x, y}, self - 1.0, "terminal state does not self-loop"});
        }
      }
    }
  }

  double init = 0.0;
  for (const FlatEntry& e : model.initial()) {
    check_prob(out, "initial", {e.x, e.y}, e.prob);
    init += e.prob;
  }
  check_sum(out, "initial", {}, init);
  for (Index x = 0; x < X; ++x) {
    bool any = false;
    for (Index a = 0; a < A; ++a) any = any || model.feasible(x, a);
    if (!any) out.push_back({"feasible", {x}, 0.0, "no feasible action"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Belief updates

std::vector<double> predict_hidden(const MomdpModel& model, const FactoredBelief& b, Index a,
                                   Index x_next) {
  std::vector<double> out(model.y_count(), 0.0);
  for (Index y = 0; y < b.b_y.size(); ++y) {
    const double w = b.b_y[y];
    if (w == 0.0) continue;
    for (const Branch& br : model.branches(a, b.x, y)) {
      if (br.x_next != x_next) continue;
      const double wx = w * br.prob;
      for (const Entry& e : model.hidden(br)) out[e.index] += wx * e.prob;
    }
  }
  return out;
}

std::optional<FactoredBelief> try_belief_update(const MomdpModel& model, const FactoredBelief& b,
                                                Index a, Index x_next, Index o) {
  std::vector<double> post = predict_hidden(model, b, a, x_next);
  double total = 0.0;
  for (Index y = 0; y < post.size(); ++y) {
    if (post[y] == 0.0) continue;
    post[y] *= model.observation_prob(a, x_next, y, o);
    total += post[y];
  }
  if (!(total >= kZeroLikelihood)) return std::nullopt;
  for (double& p : post) p /= total;
  return FactoredBelief{x_next, std::move(post)};
}

FactoredBelief belief_update(const MomdpModel& model, const FactoredBelief& b, Index a,
                             Index x_next, Index o) {
  auto post = try_belief_update(model, b, a, x_next, o);
  if (!post) {
    throw Error(ErrorCode::ZeroLikelihood,
                "observation " + std::to_string(o) + " impossible after action " +
                    std::to_string(a) + " into visible state " + std::to_string(x_next));
  }
  return std::move(*post);
}

FactoredBelief initial_belief(const MomdpModel& model, Index x) {
  FactoredBelief b{x, std::vector<double>(model.y_count(), 0.0)};
  double total = 0.0;
  for (const FlatEntry& e : model.initial()) {
    if (e.x != x) continue;
    b.b_y[e.y] += e.prob;
    total += e.prob;
  }
  if (total <= 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "visible state " + std::to_string(x) + " has no initial mass");
  }
  for (double& p : b.b_y) p /= total;
  return b;
}

std::vector<double> initial_visible(const MomdpModel& model) {
  std::vector<double> px(model.x_count(), 0.0);
  for (const FlatEntry& e : model.initial()) px[e.x] += e.prob;
  return px;
}

// ---------------------------------------------------------------------------
// Flat view

SparseRow FlatPomdpView::transition(Index s, Index a) const {
  std::map<Index, double> acc;
  const Index x = x_of(s), y = y_of(s);
  for (const Branch& b : model_->branches(a, x, y)) {
    for (const Entry& e : model_->hidden(b)) acc[state(b.x_next, e.index)] += b.prob * e.prob;
  }
  SparseRow row;
  row.reserve(acc.size());
  for (const auto& [sp, p] : acc) row.push_back({sp, p});
  return row;
}

double FlatPomdpView::observation(Index a, Index s_next, Index o) const {
  return model_->observation_prob(a, x_of(s_next), y_of(s_next), o);
}

double FlatPomdpView::reward(Index s, Index a) const {
  return model_->reward(x_of(s), y_of(s), a);
}

bool FlatPomdpView::terminal(Index s) const { return model_->terminal(x_of(s), y_of(s)); }

std::vector<double> FlatPomdpView::initial() const {
  std::vector<double> out(state_count(), 0.0);
  for (const FlatEntry& e : model_->initial()) out[state(e.x, e.y)] += e.prob;
  return out;
}

}  // namespace advisor
