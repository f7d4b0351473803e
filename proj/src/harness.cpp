#include "advisor/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "advisor/error.hpp"
#include "advisor/pipeline.hpp"

namespace advisor {

namespace {

constexpr std::uint64_t kEnvStream = 1, kSuggesterStream = 2, kAgentStream = 3;

std::string number(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

StateSample sample_idle(const IdleDynamics& idle, Index x, Index y, Rng& rng) {
  const auto branches = idle.transitions.branches(0, x, y);
  double u = rng.uniform();
  const Branch* pick = &branches.back();
  for (const Branch& b : branches) {
    if (u < b.prob) {
      pick = &b;
      break;
    }
    u -= b.prob;
  }
  return {pick->x_next, rng.categorical(idle.transitions.hidden(*pick))};
}

FactoredBelief predicted_prior(const MomdpModel& model, const FactoredBelief& b, Index a,
                               Index x_next) {
  std::vector<double> p = predict_hidden(model, b, a, x_next);
  double total = 0.0;
  for (double v : p) total += v;
  if (!(total > 0.0)) return initial_belief(model, x_next);
  for (double& v : p) v /= total;
  return {x_next, std::move(p)};
}

}  // namespace

SuggesterSpec AgentSpec::suggester_spec() const {
  if (kind == AgentKind::NoisyFixed) return SuggesterSpec::singleton(lambda);
  return types;
}

std::string AgentSpec::label() const {
  switch (kind) {
    case AgentKind::Normal: return "normal";
    case AgentKind::Perfect: return "perfect";
    case AgentKind::Naive: return "naive(nu=" + number(nu) + ")";
    case AgentKind::NoisyFixed: return "noisy(lambda=" + number(lambda) + ")";
    case AgentKind::MultiType: return "mt(t_p=" + number(types.t_p) + ")";
  }
  return "agent";
}

void AgentSpec::validate() const {
  if (kind == AgentKind::Naive && !(nu >= 0.0 && nu <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "agent.nu must lie in [0, 1]");
  }
  if (kind == AgentKind::NoisyFixed && !(lambda >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "agent.lambda must be >= 0");
  }
  if (kind == AgentKind::MultiType) types.validate();
}

Domain DomainConfig::build() const {
  return kind == DomainKind::Tag ? make_domain(tag) : make_domain(rocksample);
}

void ExperimentConfig::validate() const {
  agent.validate();
  schedule.validate();
  if (n_simulations < 1 || trials_per_simulation < 1) {
    throw Error(ErrorCode::InvalidArgument, "simulation and trial counts must be >= 1");
  }
  if (ask.cost > 0.0) throw Error(ErrorCode::InvalidCost, "ask.cost must be <= 0");
  if (solve.precision <= 0.0 || solve.base_precision <= 0.0 || solve.time <= 0.0 ||
      solve.base_time <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "solve precision and time must be > 0");
  }
  if (suggester == SuggesterKind::Heuristic && domain.kind != DomainKind::Tag) {
    throw Error(ErrorCode::InvalidArgument, "the wall-sensor suggester is defined for Tag only");
  }
}

std::size_t ExperimentConfig::max_steps() const {
  if (max_steps_per_trial > 0) return max_steps_per_trial;
  return domain.kind == DomainKind::Tag ? 200 : 100;
}

const MomdpModel& Experiment::agent_model() const {
  if (ask) return ask->model;
  if (typed) return typed->model;
  return domain.model;
}

std::shared_ptr<const Experiment> prepare_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  auto exp = std::make_shared<Experiment>();
  exp->cfg = cfg;
  exp->domain = cfg.domain.build();
  const std::filesystem::path dir = cfg.artifacts;
  const StageSettings base_settings{cfg.solve.base_precision, cfg.solve.base_time, cfg.solve.seed};
  const BaseStage stage1 = solve_base(exp->domain.model, base_settings, dir);
  exp->base_policy = stage1.policy;
  exp->q = stage1.q;
  exp->mdp = mdp_q(exp->domain.model);
  if (cfg.agent.typed()) {
    AugmentSpec aug;
    aug.spec = cfg.agent.suggester_spec();
    aug.per_step = cfg.mode == SuggestionMode::PerStep;
    aug.ask = cfg.mode == SuggestionMode::Ask;
    aug.c_ask = cfg.ask.cost;
    aug.n_ask = cfg.ask.limit;
    const StageSettings settings{cfg.solve.precision, cfg.solve.time, cfg.solve.seed};
    PipelineResult r = bootstrap_pipeline(exp->domain.model, stage1, aug, settings, dir);
    exp->typed = std::move(r.typed);
    exp->ask = std::move(r.ask);
    exp->agent_policy = std::move(r.policy);
  } else {
    exp->agent_policy = exp->base_policy;
  }
  return exp;
}

Index agent_act(const Experiment& exp, const FactoredBelief& belief, Suggestion sigma,
                StateSample true_state, Rng& rng) {
  const AgentSpec& agent = exp.cfg.agent;
  switch (agent.kind) {
    case AgentKind::Perfect: {
      const MomdpModel& m = exp.domain.model;
      const auto row = exp.mdp.row(true_state.x * m.y_count() + true_state.y);
      Index best = m.first_feasible(true_state.x);
      for (Index a = 0; a < row.size(); ++a) {
        if (m.feasible(true_state.x, a) && row[a] > row[best]) best = a;
      }
      return best;
    }
    case AgentKind::Naive:
      if (sigma.present() && rng.bernoulli(agent.nu)) return sigma.action;
      return greedy_action(exp.agent_policy, belief);
    default: {
      const Index a = greedy_action(exp.agent_policy, belief);
      const MomdpModel& m = exp.agent_model();
      return m.feasible(belief.x, a) ? a : m.first_feasible(belief.x);
    }
  }
}

Simulation::Simulation(std::shared_ptr<const Experiment> exp, std::size_t simulation_index)
    : exp_(std::move(exp)), sim_(simulation_index) {
  const std::uint64_t seed = derive_seed(exp_->cfg.seed, 0, sim_);
  env_rng_ = Rng(derive_seed(seed, kEnvStream));
  sug_rng_ = Rng(derive_seed(seed, kSuggesterStream));
  agent_rng_ = Rng(derive_seed(seed, kAgentStream));
  if (exp_->typed) carry_types_ = exp_->typed->spec.prior;
  start_trial();
}

Index Simulation::agent_visible() const {
  if (exp_->ask) return exp_->ask->visible(state_.x, counter_);
  return state_.x;
}

void Simulation::start_trial() {
  const Experiment& e = *exp_;
  state_ = reset_trial(e.domain, env_rng_);
  if (e.ask && e.cfg.ask.limit && (e.cfg.ask.per_trial || trial_ == 0)) counter_ = *e.cfg.ask.limit;
  const FactoredBelief env = initial_belief(e.domain.model, state_.x);
  if (e.typed) {
    const std::size_t m = e.typed->type_count();
    belief_.x = agent_visible();
    belief_.b_y.assign(env.b_y.size() * m, 0.0);
    for (Index y = 0; y < env.b_y.size(); ++y) {
      for (Index k = 0; k < m; ++k) belief_.b_y[e.typed->hidden(y, k)] = env.b_y[y] * carry_types_[k];
    }
  } else {
    belief_ = env;
  }
  step_ = 0;
  asks_ = 0;
  discounted_ = undiscounted_ = 0.0;
  discount_ = 1.0;
  current_ = Suggestion::absent();
  pending_ = Pending::Initial;
  phase_ = Phase::AwaitingAgent;
}

std::optional<std::vector<double>> Simulation::type_belief() const {
  if (!exp_->typed) return std::nullopt;
  return type_marginal(*exp_->typed, belief_);
}

std::optional<std::size_t> Simulation::asks_left() const {
  if (!exp_->ask || !exp_->cfg.ask.limit) return std::nullopt;
  return counter_;
}

std::vector<Index> Simulation::suggestable_actions() const {
  std::vector<Index> out;
  const MomdpModel& m = exp_->domain.model;
  for (Index a = 0; a < m.action_count(); ++a) {
    if (m.feasible(state_.x, a)) out.push_back(a);
  }
  return out;
}

Suggestion Simulation::internal_suggestion() {
  const Experiment& e = *exp_;
  switch (e.cfg.suggester) {
    case SuggesterKind::NoisyRational: {
      const double lambda = lambda_at(e.cfg.schedule, trial_);
      const Index s = state_.x * static_cast<Index>(e.domain.model.y_count()) + state_.y;
      return sample_suggestion(e.q, s, lambda, sug_rng_);
    }
    case SuggesterKind::Heuristic:
      return tag_heuristic(e.domain, state_.x, state_.y);
    default:
      return Suggestion::absent();
  }
}

void Simulation::fallback(Index a, Index x_next) {
  belief_ = predicted_prior(exp_->agent_model(), belief_, a, x_next);
}

void Simulation::apply_suggestion(Suggestion sigma) {
  const Experiment& e = *exp_;
  current_ = sigma;
  if (pending_ == Pending::Initial) {
    if (e.typed) {
      if (auto b = condition_on_suggestion(*e.typed, belief_, state_.x, sigma)) belief_ = std::move(*b);
    }
    return;
  }
  const Index x_next = agent_visible();
  if (e.typed) {
    auto b = try_joint_update(e.agent_model(), e.typed->symbols(), belief_, pending_action_, x_next,
                              pending_obs_, sigma);
    if (b) belief_ = std::move(*b);
    else fallback(pending_action_, x_next);
  } else {
    auto b = try_belief_update(e.domain.model, belief_, pending_action_, x_next, pending_obs_);
    if (b) belief_ = std::move(*b);
    else fallback(pending_action_, x_next);
  }
}

void Simulation::take_action(Index a) {
  const Experiment& e = *exp_;
  const MomdpModel& base = e.domain.model;
  const bool is_ask = e.ask && a == e.ask->ask_action();
  double r;
  if (is_ask) {
    r = e.cfg.ask.cost;
    ++asks_;
    if (e.cfg.ask.limit) --counter_;
    const IdleDynamics& idle = *base.idle();
    state_ = sample_idle(idle, state_.x, state_.y, env_rng_);
    pending_obs_ = env_rng_.categorical(idle.observations.row(0, state_.x, state_.y));
  } else {
    r = base.reward(state_.x, state_.y, a);
    state_ = sample_successor(base, a, state_.x, state_.y, env_rng_);
    pending_obs_ = sample_observation(base, a, state_.x, state_.y, env_rng_);
  }
  pending_action_ = a;
  events_.push_back({trial_, a, r});
  discounted_ += discount_ * r;
  undiscounted_ += r;
  discount_ *= base.discount();
  ++step_;
  pending_ = is_ask ? Pending::AfterAsk : Pending::AfterStep;
}

void Simulation::finish_trial(bool truncated) {
  const Experiment& e = *exp_;
  TrialRecord rec;
  rec.simulation = sim_;
  rec.trial = trial_;
  rec.discounted_reward = discounted_;
  rec.undiscounted_reward = undiscounted_;
  rec.steps = step_;
  rec.asks = asks_;
  if (e.typed) {
    rec.expected_type = expected_type(*e.typed, belief_);
    carry_types_ = type_marginal(*e.typed, belief_);
  }
  rec.lambda_star = e.cfg.suggester == SuggesterKind::NoisyRational ? lambda_at(e.cfg.schedule, trial_) : 0.0;
  rec.seed = derive_seed(e.cfg.seed, 0, sim_);
  rec.truncated = truncated;
  rec.ask_budget_end = e.ask && e.cfg.ask.limit ? counter_ : 0;
  records_.push_back(rec);
  phase_ = trial_ + 1 >= e.cfg.trials_per_simulation ? Phase::Closed : Phase::TrialEnded;
}

Simulation::Phase Simulation::advance(bool external) {
  const Experiment& e = *exp_;
  const bool interactive = external || e.cfg.suggester == SuggesterKind::Interactive;
  while (phase_ == Phase::AwaitingAgent) {
    if (pending_ != Pending::None) {
      const bool wants = e.cfg.suggester != SuggesterKind::None &&
                         (pending_ == Pending::AfterAsk || e.cfg.mode == SuggestionMode::PerStep);
      if (wants && interactive) {
        phase_ = Phase::AwaitingSuggestion;
        return phase_;
      }
      const Suggestion sigma = wants ? internal_suggestion() : Suggestion::absent();
      if (wants) answers_.push_back(sigma);
      apply_suggestion(sigma);
      pending_ = Pending::None;
    }
    const Index a = agent_act(e, belief_, current_, state_, agent_rng_);
    take_action(a);
    const bool terminal = e.domain.model.terminal(state_.x, state_.y);
    if (terminal || step_ >= e.cfg.max_steps()) {
      apply_suggestion(Suggestion::absent());
      pending_ = Pending::None;
      finish_trial(!terminal);
      return phase_;
    }
  }
  return phase_;
}

void Simulation::provide(Suggestion sigma) {
  if (phase_ != Phase::AwaitingSuggestion) {
    throw Error(ErrorCode::InvalidArgument, "no suggestion is outstanding");
  }
  if (sigma.present() && sigma.action >= exp_->domain.model.action_count()) {
    throw Error(ErrorCode::InvalidArgument, "suggested action out of range");
  }
  answers_.push_back(sigma);
  apply_suggestion(sigma);
  pending_ = Pending::None;
  phase_ = Phase::AwaitingAgent;
}

void Simulation::next_trial() {
  if (phase_ != Phase::TrialEnded) throw Error(ErrorCode::InvalidArgument, "trial has not ended");
  ++trial_;
  start_trial();
}

std::vector<TrialRecord> run_simulation(std::shared_ptr<const Experiment> exp, std::size_t index) {
  Simulation sim(std::move(exp), index);
  for (;;) {
    const auto phase = sim.advance();
    if (phase == Simulation::Phase::Closed) break;
    if (phase == Simulation::Phase::TrialEnded) {
      sim.next_trial();
    } else if (phase == Simulation::Phase::AwaitingSuggestion) {
      sim.provide(Suggestion::absent());
    }
  }
  return sim.records();
}

std::size_t worker_count() {
  if (const char* env = std::getenv("ADVISOR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrialRecord> run_experiment(std::shared_ptr<const Experiment> exp) {
  const std::size_t n = exp->cfg.n_simulations;
  std::vector<std::vector<TrialRecord>> per_sim(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        per_sim[i] = run_simulation(exp, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<TrialRecord> out;
  for (auto& v : per_sim) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(prepare_experiment(cfg));
}

MetricSummary describe(const std::vector<double>& values, std::string metric) {
  MetricSummary s;
  s.metric = std::move(metric);
  s.n = values.size();
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values to describe");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double delta = values[i] - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (values[i] - mean);
  }
  s.mean = mean;
  if (values.size() > 1) {
    const double var = m2 / static_cast<double>(values.size() - 1);
    s.ci95_half_width = 1.96 * std::sqrt(var / static_cast<double>(values.size()));
  }
  return s;
}

std::vector<MetricSummary> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to summarize");
  using Getter = std::optional<double> (*)(const TrialRecord&);
  const std::pair<const char*, Getter> metrics[] = {
      {"discounted_reward", [](const TrialRecord& r) -> std::optional<double> { return r.discounted_reward; }},
      {"undiscounted_reward", [](const TrialRecord& r) -> std::optional<double> { return r.undiscounted_reward; }},
      {"steps", [](const TrialRecord& r) -> std::optional<double> { return static_cast<double>(r.steps); }},
      {"asks", [](const TrialRecord& r) -> std::optional<double> { return static_cast<double>(r.asks); }},
      {"expected_type", [](const TrialRecord& r) { return r.expected_type; }},
  };
  std::vector<MetricSummary> out;
  for (const auto& [name, get] : metrics) {
    std::vector<double> all;
    std::map<std::size_t, std::vector<double>> by_trial;
    for (const TrialRecord& r : records) {
      if (auto v = get(r)) {
        all.push_back(*v);
        by_trial[r.trial].push_back(*v);
      }
    }
    if (all.empty()) continue;
    out.push_back(describe(all, name));
    for (auto& [t, values] : by_trial) {
      MetricSummary s = describe(values, name);
      s.trial_index = t;
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace advisor
