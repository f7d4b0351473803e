#include "advisor/augment.hpp"

#include <string>

#include "advisor/error.hpp"

namespace advisor {

namespace {

// Base hidden row (y_env entries) crossed with a type row.
SparseRow cross(std::span<const Entry> env_row, const std::vector<double>& types,
                std::size_t m, Index k, bool hold_type) {
  SparseRow out;
  out.reserve(env_row.size() * (hold_type ? 1 : m));
  for (const Entry& e : env_row) {
    if (hold_type) {
      out.push_back({e.index * static_cast<Index>(m) + k, e.prob});
      continue;
    }
    for (Index k2 = 0; k2 < m; ++k2) {
      const double p = e.prob * types[k * m + k2];
      if (p > 0.0) out.push_back({e.index * static_cast<Index>(m) + k2, p});
    }
  }
  return out;
}

std::vector<BranchSpec> cross_branches(std::span<const Branch> branches,
                                       const TransitionTable& table,
                                       const std::vector<double>& types, std::size_t m, Index k,
                                       bool hold_type) {
  std::vector<BranchSpec> out;
  out.reserve(branches.size());
  for (const Branch& b : branches) {
    out.push_back({b.x_next, b.prob, cross(table.hidden(b), types, m, k, hold_type)});
  }
  return out;
}

}  // namespace

Suggestion TypedModel::suggestion_of(Index composite) const {
  const Index s = composite % static_cast<Index>(symbols());
  return s == absent_symbol() ? Suggestion::absent() : Suggestion::of(s);
}

double TypedModel::suggestion_prob(Index x, Index y_env, Index type, Index sigma) const {
  const std::size_t A = base.action_count();
  return sigma_table[((static_cast<std::size_t>(x) * env_y_count() + y_env) * type_count() + type) *
                         A + sigma];
}

TypedModel augment_types(const MomdpModel& base, const SuggesterSpec& spec, const QTable& q,
                         bool per_step) {
  spec.validate();
  if (q.x_count != base.x_count() || q.y_count != base.y_count() ||
      q.action_count != base.action_count() || q.values.size() != q.state_count() * q.action_count) {
    throw Error(ErrorCode::DimensionMismatch, "Q table does not match the base model");
  }
  TypedModel t;
  t.base = base;
  t.spec = spec;
  t.q = q;
  t.per_step = per_step;

  const std::size_t X = base.x_count(), Y = base.y_count(), A = base.action_count();
  const std::size_t O = base.observation_count(), m = spec.size(), S = A + 1;
  const auto P = type_transition_matrix(spec);

  t.sigma_table.assign(X * Y * m * A, 0.0);
  std::vector<char> mask(A);
  for (Index x = 0; x < X; ++x) {
    for (Index a = 0; a < A; ++a) mask[a] = base.feasible(x, a) ? 0 : 1;
    for (Index y = 0; y < Y; ++y) {
      for (Index k = 0; k < m; ++k) {
        const auto p = suggestion_distribution(q.row(x * Y + y), spec.types[k], mask);
        std::copy(p.begin(), p.end(), t.sigma_table.begin() + ((x * Y + y) * m + k) * A);
      }
    }
  }

  std::vector<std::string> observations;
  observations.reserve(O * S);
  for (std::size_t o = 0; o < O; ++o) {
    for (std::size_t s = 0; s < S; ++s) {
      observations.push_back(base.observations()[o] + "|" +
                             (s < A ? base.actions()[s] : std::string("absent")));
    }
  }
  ModelBuilder b(X, Y * m, base.actions(), std::move(observations), base.discount());

  auto observe = [&](std::span<const Entry> row, Index x_next, Index y_env, Index k) {
    SparseRow out;
    for (const Entry& e : row) {
      if (!per_step) {
        out.push_back({e.index * static_cast<Index>(S) + static_cast<Index>(A), e.prob});
        continue;
      }
      for (Index s = 0; s < A; ++s) {
        const double p = e.prob * t.suggestion_prob(x_next, y_env, k, s);
        if (p > 0.0) out.push_back({e.index * static_cast<Index>(S) + s, p});
      }
    }
    return out;
  };

  for (Index x = 0; x < X; ++x) {
    for (Index y = 0; y < Y; ++y) {
      const bool term = base.terminal(x, y);
      for (Index k = 0; k < m; ++k) {
        const Index yt = t.hidden(y, k);
        for (Index a = 0; a < A; ++a) {
          b.set_transition(a, x, yt,
                           cross_branches(base.branches(a, x, y), base.transition_table(), P, m, k,
                                          term));
          b.set_observation(a, x, yt, observe(base.observation_row(a, x, y), x, y, k));
          b.set_reward(x, yt, a, base.reward(x, y, a));
        }
        if (term) b.set_terminal(x, yt);
      }
    }
    for (Index a = 0; a < A; ++a) {
      if (!base.feasible(x, a)) b.set_infeasible(x, a);
    }
  }
  if (const IdleDynamics* idle = base.idle()) {
    b.enable_idle();
    for (Index x = 0; x < X; ++x) {
      for (Index y = 0; y < Y; ++y) {
        for (Index k = 0; k < m; ++k) {
          b.set_idle_transition(x, t.hidden(y, k),
                                cross_branches(idle->transitions.branches(0, x, y),
                                               idle->transitions, P, m, k, base.terminal(x, y)));
          SparseRow row;
          for (const Entry& e : idle->observations.row(0, x, y)) row.push_back(e);
          b.set_idle_observation(x, t.hidden(y, k), std::move(row));
        }
      }
    }
  }
  std::vector<FlatEntry> init;
  for (const FlatEntry& e : base.initial()) {
    for (Index k = 0; k < m; ++k) {
      if (spec.prior[k] > 0.0) init.push_back({e.x, t.hidden(e.y, k), e.prob * spec.prior[k]});
    }
  }
  b.set_initial(std::move(init));
  t.model = std::move(b).build();
  return t;
}

std::optional<FactoredBelief> try_joint_update(const MomdpModel& model, std::size_t symbols,
                                               const FactoredBelief& b, Index a, Index x_next,
                                               Index o, Suggestion sigma) {
  std::vector<double> post = predict_hidden(model, b, a, x_next);
  const Index S = static_cast<Index>(symbols);
  double total = 0.0;
  for (Index y = 0; y < post.size(); ++y) {
    if (post[y] == 0.0) continue;
    double like = 0.0;
    for (const Entry& e : model.observation_row(a, x_next, y)) {
      if (e.index / S != o) continue;
      if (!sigma.present() || e.index % S == sigma.action) like += e.prob;
    }
    post[y] *= like;
    total += post[y];
  }
  if (!(total >= kZeroLikelihood)) return std::nullopt;
  for (double& v : post) v /= total;
  return FactoredBelief{x_next, std::move(post)};
}

FactoredBelief joint_update(const MomdpModel& model, std::size_t symbols, const FactoredBelief& b,
                            Index a, Index x_next, Index o, Suggestion sigma) {
  auto post = try_joint_update(model, symbols, b, a, x_next, o, sigma);
  if (!post) throw Error(ErrorCode::ZeroLikelihood, "observation and suggestion impossible under belief");
  return std::move(*post);
}

FactoredBelief joint_update(const TypedModel& model, const FactoredBelief& b, Index a,
                            Index x_next, Index o, Suggestion sigma) {
  return joint_update(model.model, model.symbols(), b, a, x_next, o, sigma);
}

std::optional<FactoredBelief> condition_on_suggestion(const TypedModel& model,
                                                      const FactoredBelief& b, Index x_base,
                                                      Suggestion sigma) {
  if (!sigma.present()) return b;
  FactoredBelief out = b;
  double total = 0.0;
  for (Index y = 0; y < out.b_y.size(); ++y) {
    if (out.b_y[y] == 0.0) continue;
    out.b_y[y] *= model.suggestion_prob(x_base, model.env_of(y), model.type_of(y), sigma.action);
    total += out.b_y[y];
  }
  if (!(total >= kZeroLikelihood)) return std::nullopt;
  for (double& v : out.b_y) v /= total;
  return out;
}

std::vector<double> type_marginal(const TypedModel& model, const FactoredBelief& b) {
  std::vector<double> out(model.type_count(), 0.0);
  for (Index y = 0; y < b.b_y.size(); ++y) out[model.type_of(y)] += b.b_y[y];
  return out;
}

double expected_type(const TypedModel& model, const FactoredBelief& b) {
  const auto marginal = type_marginal(model, b);
  double v = 0.0;
  for (std::size_t k = 0; k < marginal.size(); ++k) v += model.spec.types[k] * marginal[k];
  return v;
}

AskModel augment_ask(const TypedModel& typed, double c_ask, std::optional<std::size_t> n_ask) {
  if (c_ask > 0.0) throw Error(ErrorCode::InvalidCost, "ask cost must be <= 0");
  const MomdpModel& tm = typed.model;
  const MomdpModel& base = typed.base;
  const IdleDynamics* idle = tm.idle();
  if (idle == nullptr) throw Error(ErrorCode::InvalidModel, "ask transform needs idle dynamics");

  AskModel out;
  out.typed = typed;
  out.c_ask = c_ask;
  out.n_ask = n_ask;
  const std::size_t L = out.levels();
  const std::size_t Xb = tm.x_count(), Y = tm.y_count(), A = base.action_count();
  const std::size_t S = typed.symbols();
  const Index ask = out.ask_action();
  const Index absent = typed.absent_symbol();

  std::vector<std::string> actions = base.actions();
  actions.push_back("ask");
  ModelBuilder b(Xb * L, Y, std::move(actions), tm.observations(), tm.discount());

  auto relabel = [&](std::span<const Branch> branches, const TransitionTable& table,
                     std::size_t counter) {
    std::vector<BranchSpec> spec;
    for (const Branch& br : branches) {
      SparseRow row(table.hidden(br).begin(), table.hidden(br).end());
      spec.push_back({out.visible(br.x_next, counter), br.prob, std::move(row)});
    }
    return spec;
  };

  for (Index xb = 0; xb < Xb; ++xb) {
    for (std::size_t c = 0; c < L; ++c) {
      const Index x = out.visible(xb, c);
      const bool can_ask = !n_ask || c > 0;
      const std::size_t after = n_ask ? (c > 0 ? c - 1 : 0) : 0;
      for (Index y = 0; y < Y; ++y) {
        const bool term = tm.terminal(xb, y);
        const Index ye = typed.env_of(y), k = typed.type_of(y);
        for (Index a = 0; a < A; ++a) {
          b.set_transition(a, x, y, relabel(tm.branches(a, xb, y), tm.transition_table(), c));
          b.set_reward(x, y, a, tm.reward(xb, y, a));
        }
        if (term || !can_ask) {
          b.set_transition(ask, x, y, {{x, 1.0, {{y, 1.0}}}});
        } else {
          b.set_transition(ask, x, y, relabel(idle->transitions.branches(0, xb, y), idle->transitions, after));
          b.set_reward(x, y, ask, c_ask);
        }
        for (Index a = 0; a < A; ++a) {
          SparseRow row;
          for (const Entry& e : base.observation_row(a, xb, ye)) {
            row.push_back({e.index * static_cast<Index>(S) + absent, e.prob});
          }
          b.set_observation(a, x, y, std::move(row));
        }
        SparseRow row;
        for (const Entry& e : idle->observations.row(0, xb, y)) {
          for (Index s = 0; s < A; ++s) {
            const double p = e.prob * typed.suggestion_prob(xb, ye, k, s);
            if (p > 0.0) row.push_back({e.index * static_cast<Index>(S) + s, p});
          }
        }
        b.set_observation(ask, x, y, std::move(row));
        if (term) b.set_terminal(x, y);
      }
      for (Index a = 0; a < A; ++a) {
        if (!tm.feasible(xb, a)) b.set_infeasible(x, a);
      }
      if (!can_ask) b.set_infeasible(x, ask);
    }
  }
  std::vector<FlatEntry> init;
  for (const FlatEntry& e : tm.initial()) init.push_back({out.visible(e.x, n_ask.value_or(0)), e.y, e.prob});
  b.set_initial(std::move(init));
  out.model = std::move(b).build();
  return out;
}

}  // namespace advisor
