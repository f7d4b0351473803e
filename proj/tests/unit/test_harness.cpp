#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include "advisor/error.hpp"
#include "advisor/harness.hpp"
#include "advisor/io.hpp"

using namespace advisor;

namespace {

const std::filesystem::path& artifacts() {
  static const auto dir = [] {
    auto d = std::filesystem::temp_directory_path() / "advisor_harness_test";
    std::filesystem::remove_all(d);
    return d;
  }();
  return dir;
}

ExperimentConfig small(AgentKind kind) {
  ExperimentConfig c;
  c.domain.kind = DomainKind::RockSample;
  c.domain.rocksample.n = 3;
  c.domain.rocksample.k = 2;
  c.agent.kind = kind;
  c.agent.types = SuggesterSpec::standard();
  c.agent.lambda = 2.0;
  c.schedule = LambdaSchedule::constant(2.0);
  c.n_simulations = 3;
  c.trials_per_simulation = 4;
  c.seed = 42;
  c.solve = {1e-3, 3.0, 1e-2, 3.0, 0};
  c.artifacts = artifacts().string();
  return c;
}

ExperimentConfig ask_config(std::optional<std::size_t> limit, bool per_trial) {
  auto c = small(AgentKind::MultiType);
  c.mode = SuggestionMode::Ask;
  c.ask.cost = -0.1;
  c.ask.limit = limit;
  c.ask.per_trial = per_trial;
  c.schedule = LambdaSchedule::constant(10.0);
  return c;
}

}  // namespace

TEST_CASE("identical seeds give identical record streams") {
  const auto cfg = small(AgentKind::MultiType);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  CHECK(a == b);
  CHECK(records_to_jsonl(a) == records_to_jsonl(b));
  CHECK(a.size() == cfg.n_simulations * cfg.trials_per_simulation);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].simulation == i / cfg.trials_per_simulation);
    CHECK(a[i].trial == i % cfg.trials_per_simulation);
    CHECK(a[i].steps <= cfg.max_steps());
    REQUIRE(a[i].expected_type);
  }

  auto other = cfg;
  other.seed = 43;
  CHECK(run_experiment(other) != a);

  // Scheduling does not change the output.
  const auto exp = prepare_experiment(cfg);
  setenv("ADVISOR_THREADS", "3", 1);
  const auto threaded = run_experiment(exp);
  setenv("ADVISOR_THREADS", "1", 1);
  const auto serial = run_experiment(exp);
  unsetenv("ADVISOR_THREADS");
  CHECK(threaded == serial);
  CHECK(serial == a);
}

TEST_CASE("step rewards add up to the trial record exactly") {
  for (const auto& cfg : {small(AgentKind::MultiType), ask_config(1, true), ask_config(std::nullopt, true)}) {
    const auto exp = prepare_experiment(cfg);
    for (std::size_t s = 0; s < cfg.n_simulations; ++s) {
      Simulation sim(exp, s);
      while (sim.advance() != Simulation::Phase::Closed) sim.next_trial();
      const double gamma = exp->domain.model.discount();
      for (const TrialRecord& r : sim.records()) {
        double total = 0.0, discounted = 0.0, weight = 1.0;
        std::size_t steps = 0, asks = 0;
        for (const StepEvent& e : sim.events()) {
          if (e.trial != r.trial) continue;
          total += e.reward;
          discounted += weight * e.reward;
          weight *= gamma;
          ++steps;
          asks += exp->ask && e.action == exp->ask->ask_action();
        }
        CHECK(total == r.undiscounted_reward);
        CHECK(discounted == r.discounted_reward);
        CHECK(steps == r.steps);
        CHECK(asks == r.asks);
      }
    }
  }
}

TEST_CASE("ask budgets are never exceeded") {
  SUBCASE("per trial") {
    const auto cfg = ask_config(1, true);
    std::size_t total = 0;
    for (const auto& r : run_experiment(cfg)) {
      CHECK(r.asks <= 1);
      CHECK(r.ask_budget_end == 1 - r.asks);
      total += r.asks;
    }
    CHECK(total > 0);
  }
  SUBCASE("per simulation") {
    const auto cfg = ask_config(2, false);
    std::vector<std::size_t> per_sim(cfg.n_simulations, 0);
    for (const auto& r : run_experiment(cfg)) per_sim[r.simulation] += r.asks;
    for (auto n : per_sim) CHECK(n <= 2);
  }
}

TEST_CASE("naive agents") {
  SUBCASE("nu = 0 behaves like the normal agent") {
    auto normal = small(AgentKind::Normal);
    auto naive = small(AgentKind::Naive);
    naive.agent.nu = 0.0;
    CHECK(run_experiment(normal) == run_experiment(naive));
  }
  SUBCASE("nu = 1 follows the suggestion") {
    auto cfg = small(AgentKind::Naive);
    cfg.agent.nu = 1.0;
    const auto exp = prepare_experiment(cfg);
    const auto b = initial_belief(exp->domain.model, 3);
    Rng rng(1);
    CHECK(agent_act(*exp, b, Suggestion::of(3), {3, 0}, rng) == 3);
    CHECK(agent_act(*exp, b, Suggestion::absent(), {3, 0}, rng) == greedy_action(exp->agent_policy, b));
  }
  SUBCASE("nu = 0.75 follows three times in four") {
    auto cfg = small(AgentKind::Naive);
    cfg.agent.nu = 0.75;
    const auto exp = prepare_experiment(cfg);
    const auto b = initial_belief(exp->domain.model, 3);
    const Index own = greedy_action(exp->agent_policy, b);
    const Index other = (own + 1) % static_cast<Index>(exp->domain.model.action_count());
    Rng rng(2);
    const int n = 100000;
    int follow = 0;
    for (int i = 0; i < n; ++i) follow += agent_act(*exp, b, Suggestion::of(other), {3, 0}, rng) == other;
    const double sd = std::sqrt(0.75 * 0.25 / n);
    CHECK(std::abs(static_cast<double>(follow) / n - 0.75) <= 3.0 * sd);
  }
}

TEST_CASE("perfect agent reads the true state") {
  const auto exp = prepare_experiment(small(AgentKind::Perfect));
  const auto& m = exp->domain.model;
  const auto b = initial_belief(m, 3);
  Rng rng(0);
  for (Index x = 0; x < m.x_count(); ++x) {
    for (Index y = 0; y < m.y_count(); ++y) {
      const Index a = agent_act(*exp, b, Suggestion::absent(), {x, y}, rng);
      const auto row = exp->mdp.row(x * m.y_count() + y);
      CHECK(row[a] == *std::max_element(row.begin(), row.end()));
    }
  }
}

TEST_CASE("interactive stepping matches batch when answers replay") {
  const auto cfg = small(AgentKind::MultiType);
  const auto exp = prepare_experiment(cfg);
  Simulation batch(exp, 1);
  while (batch.advance() != Simulation::Phase::Closed) batch.next_trial();

  Simulation live(exp, 1);
  std::size_t next = 0;
  for (;;) {
    const auto phase = live.advance(true);
    if (phase == Simulation::Phase::Closed) break;
    if (phase == Simulation::Phase::TrialEnded) live.next_trial();
    if (phase == Simulation::Phase::AwaitingSuggestion) live.provide(batch.answers().at(next++));
  }
  CHECK(next == batch.answers().size());
  CHECK(live.records() == batch.records());
}

TEST_CASE("summaries") {
  CHECK(describe({3.0, 3.0, 3.0}).ci95_half_width == 0.0);
  const auto two = describe({0.0, 2.0});
  CHECK(two.mean == 1.0);
  CHECK(two.ci95_half_width == doctest::Approx(1.96).epsilon(1e-15));
  CHECK(describe({5.0}).ci95_half_width == 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<double> xs(10000);
  for (auto& v : xs) v = normal(rng);
  CHECK(std::abs(describe(xs).ci95_half_width - 0.0196) <= 0.00196);

  try {
    summarize({});
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }

  std::vector<TrialRecord> rs;
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t t = 0; t < 3; ++t) rs.push_back({s, t, double(s), double(t), 1, 0, std::nullopt, 0, 0, false, 0});
  }
  const auto rows = summarize(rs);
  std::size_t steps_rows = 0;
  for (const auto& r : rows) {
    CHECK(r.metric != "expected_type");
    CHECK(r.ci95_half_width >= 0.0);
    if (r.metric == "steps") {
      ++steps_rows;
      CHECK(r.n == (r.trial_index ? 4u : 12u));
    }
    if (r.metric == "undiscounted_reward" && r.trial_index) CHECK(r.mean == double(*r.trial_index));
  }
  CHECK(steps_rows == 1 + 3);
}

TEST_CASE("config validation") {
  auto cfg = small(AgentKind::Naive);
  cfg.agent.nu = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small(AgentKind::Normal);
  cfg.domain.kind = DomainKind::RockSample;
  cfg.suggester = SuggesterKind::Heuristic;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small(AgentKind::Normal);
  cfg.ask.cost = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
