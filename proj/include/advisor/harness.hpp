#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "advisor/augment.hpp"
#include "advisor/domains.hpp"
#include "advisor/momdp.hpp"
#include "advisor/policy.hpp"
#include "advisor/random.hpp"
#include "advisor/solver.hpp"
#include "advisor/suggesters.hpp"

namespace advisor {

enum class AgentKind { Normal, Perfect, Naive, NoisyFixed, MultiType };

struct AgentSpec {
  AgentKind kind = AgentKind::Normal;
  double nu = 0.0;       // Naive follow probability
  double lambda = 0.0;   // NoisyFixed coefficient
  SuggesterSpec types;   // MultiType hypotheses

  bool typed() const { return kind == AgentKind::NoisyFixed || kind == AgentKind::MultiType; }
  /// The hypothesis set the agent's typed model is built on.
  SuggesterSpec suggester_spec() const;
  std::string label() const;
  void validate() const;
};

enum class SuggesterKind { None, NoisyRational, Heuristic, Interactive };

/// Per step: a suggestion is drawn before every decision. Ask: suggestions
/// arrive only in response to the agent's ask action.
enum class SuggestionMode { PerStep, Ask };

struct AskSettings {
  double cost = -1.0;
  std::optional<std::size_t> limit;  // nullopt: unlimited
  bool per_trial = true;             // replenish the counter at each reset
};

struct SolveSettings {
  double base_precision = 0.01;
  double base_time = 300.0;
  double precision = 0.01;
  double time = 300.0;
  std::uint64_t seed = 0;
};

struct DomainConfig {
  DomainKind kind = DomainKind::Tag;
  TagConfig tag;
  RockSampleConfig rocksample;

  Domain build() const;
};

struct ExperimentConfig {
  DomainConfig domain;
  AgentSpec agent;
  SuggesterKind suggester = SuggesterKind::NoisyRational;
  LambdaSchedule schedule = LambdaSchedule::constant(1.0);
  SuggestionMode mode = SuggestionMode::PerStep;
  AskSettings ask;
  std::size_t n_simulations = 1;
  std::size_t trials_per_simulation = 1;
  std::size_t max_steps_per_trial = 0;  // 0: domain default
  std::uint64_t seed = 0;
  SolveSettings solve;
  std::string artifacts;  // pipeline directory; empty: solve in memory
  std::string output;

  void validate() const;
  std::size_t max_steps() const;
};

struct TrialRecord {
  std::size_t simulation = 0;
  std::size_t trial = 0;
  double discounted_reward = 0.0;
  double undiscounted_reward = 0.0;
  std::size_t steps = 0;
  std::size_t asks = 0;
  std::optional<double> expected_type;
  double lambda_star = 0.0;
  std::uint64_t seed = 0;
  bool truncated = false;
  std::size_t ask_budget_end = 0;  // counter left at trial end (0 when unlimited)

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Everything an experiment needs at run time: the domain, the solved base
/// model and its Q values, and the agent's own model and policy.
struct Experiment {
  ExperimentConfig cfg;
  Domain domain;
  AlphaPolicy base_policy;
  QTable q;           // suggester's action values
  QTable mdp;         // Perfect agent
  std::optional<TypedModel> typed;
  std::optional<AskModel> ask;
  AlphaPolicy agent_policy;

  /// Model the agent's beliefs live in.
  const MomdpModel& agent_model() const;
  std::size_t symbols() const { return domain.model.action_count() + 1; }
};

/// Solves (or loads from cfg.artifacts) everything the config needs.
std::shared_ptr<const Experiment> prepare_experiment(const ExperimentConfig& cfg);

/// The agent's decision given its belief in its own model. `true_state` is
/// only read by the Perfect agent.
Index agent_act(const Experiment& exp, const FactoredBelief& belief, Suggestion sigma,
                StateSample true_state, Rng& rng);

/// One executed action, in simulation order.
struct StepEvent {
  std::size_t trial = 0;
  Index action = 0;  // in the agent's model; the ask action is the last index
  double reward = 0.0;
};

/// Sequential state machine for one simulation. Batch runs and interactive
/// sessions drive the same stepper; only the suggestion source differs.
class Simulation {
 public:
  enum class Phase { AwaitingAgent, AwaitingSuggestion, TrialEnded, Closed };

  Simulation(std::shared_ptr<const Experiment> exp, std::size_t simulation_index);

  Phase phase() const { return phase_; }
  /// Runs until a suggestion is needed, a trial ends, or the simulation
  /// closes. Internal suggesters are sampled inline unless `external`.
  Phase advance(bool external = false);
  /// Answers the outstanding suggestion request.
  void provide(Suggestion sigma);
  /// Starts the next trial after TrialEnded.
  void next_trial();

  const std::vector<TrialRecord>& records() const { return records_; }
  const std::vector<StepEvent>& events() const { return events_; }
  /// Every suggestion handed over in answer to a request, in order.
  const std::vector<Suggestion>& answers() const { return answers_; }
  std::size_t index() const { return sim_; }
  std::size_t trial() const { return trial_; }
  std::size_t step() const { return step_; }
  StateSample state() const { return state_; }
  const FactoredBelief& belief() const { return belief_; }
  std::optional<std::vector<double>> type_belief() const;
  std::optional<std::size_t> asks_left() const;
  /// Suggestion the internal suggester would draw at the current state.
  Suggestion internal_suggestion();
  std::vector<Index> suggestable_actions() const;
  const Experiment& experiment() const { return *exp_; }

 private:
  enum class Pending { None, Initial, AfterAsk, AfterStep };

  void start_trial();
  void finish_trial(bool truncated);
  void apply_suggestion(Suggestion sigma);
  void take_action(Index a);
  Index agent_visible() const;
  void fallback(Index a, Index x_next);

  std::shared_ptr<const Experiment> exp_;
  std::size_t sim_;
  Rng env_rng_, sug_rng_, agent_rng_;
  Phase phase_ = Phase::AwaitingAgent;
  Pending pending_ = Pending::Initial;
  std::size_t trial_ = 0, step_ = 0, asks_ = 0;
  StateSample state_{0, 0};
  FactoredBelief belief_;
  std::vector<double> carry_types_;
  std::size_t counter_ = 0;
  double discounted_ = 0.0, undiscounted_ = 0.0, discount_ = 1.0;
  Suggestion current_;
  Index pending_action_ = 0;
  Index pending_obs_ = 0;
  std::vector<TrialRecord> records_;
  std::vector<StepEvent> events_;
  std::vector<Suggestion> answers_;
};

std::vector<TrialRecord> run_simulation(std::shared_ptr<const Experiment> exp, std::size_t index);
/// Runs all simulations on a worker pool capped by ADVISOR_THREADS. Output
/// is ordered by (simulation, trial).
std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg);
std::vector<TrialRecord> run_experiment(std::shared_ptr<const Experiment> exp);

struct MetricSummary {
  std::string metric;
  std::optional<std::size_t> trial_index;  // nullopt: overall
  double mean = 0.0;
  double ci95_half_width = 0.0;
  std::size_t n = 0;
};

/// Means with 1.96 * stderr half-widths, overall and by trial index.
/// Throws EmptyInput.
std::vector<MetricSummary> summarize(const std::vector<TrialRecord>& records);

/// Mean and 95% half-width of a sample.
MetricSummary describe(const std::vector<double>& values, std::string metric = {});

std::size_t worker_count();

}  // namespace advisor
