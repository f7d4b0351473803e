#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "advisor/augment.hpp"
#include "advisor/domains.hpp"
#include "advisor/error.hpp"
#include "advisor/pipeline.hpp"
#include "support/oracles.hpp"
#include "support/toy_models.hpp"
#include "support/typed_oracle.hpp"
#include "support/typed_sweep.hpp"

using namespace advisor;
using namespace advisor::testing;

namespace {

/// One state, one action, with idle dynamics so the ask transform applies.
MomdpModel single_state_idle() {
  ModelBuilder b(1, 1, {"stay"}, {"none"}, 0.9);
  b.set_transition(0, 0, 0, {{0, 1.0, {{0, 1.0}}}});
  b.set_observation(0, 0, 0, {{0, 1.0}});
  b.set_reward(0, 0, 0, 1.0);
  b.enable_idle();
  b.set_idle_transition(0, 0, {{0, 1.0, {{0, 1.0}}}});
  b.set_idle_observation(0, 0, {{0, 1.0}});
  b.set_initial({{0, 0, 1.0}});
  return std::move(b).build();
}

}  // namespace

TEST_CASE("singleton type keeps the base dynamics") {
  std::mt19937_64 rng(1);
  const auto base = random_model(rng, 2, 3, 2, 2);
  const auto q = random_q(rng, base);
  const auto typed = augment_types(base, SuggesterSpec::singleton(2.0), q);
  CHECK(typed.model.x_count() == base.x_count());
  CHECK(typed.model.y_count() == base.y_count());
  CHECK(typed.model.observation_count() == base.observation_count() * 3);
  CHECK(validate_model(typed.model).empty());
  const auto db = dense_flat(base), dt = dense_flat(typed.model);
  for (std::size_t i = 0; i < db.T.size(); ++i) CHECK(dt.T[i] == doctest::Approx(db.T[i]).epsilon(1e-15));
  // Summing out the suggestion symbol recovers the base observation.
  for (std::size_t a = 0; a < db.A; ++a) {
    for (std::size_t s = 0; s < db.S; ++s) {
      for (std::size_t o = 0; o < db.O; ++o) {
        double sum = 0.0;
        for (std::size_t g = 0; g < 3; ++g) sum += dt.z(a, s, o * 3 + g);
        CHECK(sum == doctest::Approx(db.z(a, s, o)).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("static types give block-diagonal hidden dynamics") {
  std::mt19937_64 rng(2);
  const auto base = random_model(rng, 2, 2, 2, 2);
  const auto typed = augment_types(base, SuggesterSpec::standard(0.0), random_q(rng, base));
  for (Index a = 0; a < 2; ++a) {
    for (Index x = 0; x < 2; ++x) {
      for (Index y = 0; y < typed.model.y_count(); ++y) {
        for (const Branch& b : typed.model.branches(a, x, y)) {
          for (const Entry& e : typed.model.hidden(b)) CHECK(typed.type_of(e.index) == typed.type_of(y));
        }
      }
    }
  }
}

TEST_CASE("flat typed rows equal explicit Kronecker products") {
  std::mt19937_64 rng(3);
  const auto base = random_model(rng, 1, 3, 2, 2);
  const auto q = random_q(rng, base);
  const std::vector<double> types{0.0, 5.0};
  const auto typed = augment_types(base, {types, 0.05, {0.5, 0.5}}, q);
  const auto oracle = typed_oracle(base, q, types, 0.05, true);
  const auto d = dense_flat(typed.model);
  REQUIRE(d.S == oracle.S());
  const std::size_t m = 2, A = 2, O = 2, Sb = 3;
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t s = 0; s < Sb; ++s) {
      for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t sp = 0; sp < Sb; ++sp) {
          for (std::size_t kp = 0; kp < m; ++kp) {
            CHECK(std::abs(d.t(a, s * m + k, sp * m + kp) - oracle.t(a, s, k, sp, kp)) < 1e-12);
          }
        }
      }
      for (std::size_t kp = 0; kp < m; ++kp) {
        for (std::size_t o = 0; o < O; ++o) {
          for (std::size_t g = 0; g <= A; ++g) {
            CHECK(std::abs(d.z(a, s * m + kp, o * (A + 1) + g) - oracle.z(a, s, kp, o, g)) < 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("joint update matches the brute-force typed posterior") {
  const auto r = sweep_joint_update(4, 100);
  CHECK(r.support_mismatch == 0);
  CHECK(r.compared > 50);
  CHECK(r.max_error < 1e-12);
}

TEST_CASE("suggestions carry no type evidence when every type agrees") {
  std::mt19937_64 rng(5);
  const auto base = random_model(rng, 1, 2, 3, 2);
  QTable q{1, 2, 3, std::vector<double>(6, 1.5)};
  const auto typed = augment_types(base, SuggesterSpec::standard(0.0), q);
  auto b = initial_belief(typed.model, 0);
  for (Index g = 0; g < 3; ++g) {
    b = joint_update(typed, b, g % 3, 0, 0, Suggestion::of(g));
    const auto marginal = type_marginal(typed, b);
    const auto& prior = typed.spec.prior;
    for (std::size_t k = 0; k < 5; ++k) CHECK(marginal[k] == doctest::Approx(prior[k]).epsilon(1e-12));
  }
}

TEST_CASE("a best-action suggestion shifts mass toward the sharper type") {
  // Deterministic one-state model with Q = [2, 0].
  ModelBuilder mb(1, 1, {"a", "b"}, {"o"}, 0.9);
  for (Index a = 0; a < 2; ++a) {
    mb.set_transition(a, 0, 0, {{0, 1.0, {{0, 1.0}}}});
    mb.set_observation(a, 0, 0, {{0, 1.0}});
  }
  mb.set_initial({{0, 0, 1.0}});
  const auto base = std::move(mb).build();
  const QTable q{1, 1, 2, {2.0, 0.0}};
  const auto typed = augment_types(base, {{0.0, 10.0}, 0.0, {0.5, 0.5}}, q);
  const auto post = joint_update(typed, initial_belief(typed.model, 0), 0, 0, 0, Suggestion::of(0));
  const double p0 = 0.5, p10 = 1.0 / (1.0 + std::exp(-20.0));
  const auto marginal = type_marginal(typed, post);
  CHECK(marginal[1] > 0.5);
  CHECK(marginal[1] == doctest::Approx(0.5 * p10 / (0.5 * p0 + 0.5 * p10)).epsilon(1e-14));

  const auto cond = condition_on_suggestion(typed, initial_belief(typed.model, 0), 0, Suggestion::of(0));
  REQUIRE(cond);
  CHECK(type_marginal(typed, *cond)[1] == doctest::Approx(marginal[1]).epsilon(1e-14));
}

TEST_CASE("absent suggestions let type beliefs drift toward uniform") {
  std::mt19937_64 rng(6);
  const auto base = random_model(rng, 1, 3, 2, 2);
  const auto typed = augment_types(base, SuggesterSpec::standard(0.05), random_q(rng, base));
  const auto P = type_transition_matrix(typed.spec);
  auto b = initial_belief(typed.model, 0);
  std::vector<double> expected = typed.spec.prior;
  for (int step = 0; step < 60; ++step) {
    b = joint_update(typed, b, step % 2, 0, static_cast<Index>(step % 2), Suggestion::absent());
    std::vector<double> next(5, 0.0);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) next[j] += expected[i] * P[i * 5 + j];
    }
    expected = next;
    const auto marginal = type_marginal(typed, b);
    for (std::size_t k = 0; k < 5; ++k) CHECK(marginal[k] == doctest::Approx(expected[k]).epsilon(1e-12));
  }
  CHECK(expected_type(typed, b) == doctest::Approx(3.6).epsilon(0.05));
}

TEST_CASE("expected type") {
  std::mt19937_64 rng(7);
  const auto base = random_model(rng, 1, 2, 2, 2);
  const auto typed = augment_types(base, SuggesterSpec::standard(), random_q(rng, base));
  FactoredBelief b = initial_belief(typed.model, 0);
  CHECK(expected_type(typed, b) == doctest::Approx(3.0).epsilon(1e-14));
  for (Index y = 0; y < b.b_y.size(); ++y) b.b_y[y] = 0.1;
  CHECK(expected_type(typed, b) == doctest::Approx(3.6).epsilon(1e-14));
  for (Index y = 0; y < b.b_y.size(); ++y) b.b_y[y] = typed.type_of(y) == 3 ? 0.5 : 0.0;
  CHECK(expected_type(typed, b) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("ask transform") {
  const auto base = single_state_idle();
  const QTable q{1, 1, 1, {10.0}};
  const auto typed = augment_types(base, SuggesterSpec::standard(), q, false);
  CHECK_THROWS_AS(augment_ask(typed, 0.5, 1), Error);
  try {
    augment_ask(typed, 0.5, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidCost);
  }

  SUBCASE("an exhausted counter forbids asking") {
    const auto ask = augment_ask(typed, -1.0, 0);
    CHECK(validate_model(ask.model).empty());
    CHECK_FALSE(ask.model.feasible(0, ask.ask_action()));
    SolveParams p;
    p.target_precision = 1e-6;
    p.time_budget = 10;
    const double v_ask = initial_value(ask.model, solve(ask.model, p));
    const double v_typed = initial_value(typed.model, solve(typed.model, p));
    CHECK(v_ask == doctest::Approx(v_typed).epsilon(1e-6));
  }

  SUBCASE("the counter decrements on each ask") {
    const auto ask = augment_ask(typed, -1.0, 2);
    CHECK(ask.model.x_count() == 3);
    const Index x = ask.visible(0, 2);
    CHECK(ask.model.feasible(x, ask.ask_action()));
    const auto branches = ask.model.branches(ask.ask_action(), x, 0);
    REQUIRE(branches.size() == 1);
    CHECK(ask.counter(branches[0].x_next) == std::optional<std::size_t>(1));
    CHECK(ask.model.reward(x, 0, ask.ask_action()) == -1.0);
    // A normal action keeps the counter.
    CHECK(ask.counter(ask.model.branches(0, x, 0)[0].x_next) == std::optional<std::size_t>(2));
  }
}

TEST_CASE("asking in RockSample leaves the agent in place") {
  RockSampleConfig cfg;
  const auto base = make_rocksample(cfg);
  const auto typed = augment_types(base, SuggesterSpec::singleton(1.0), mdp_q(base), false);
  const auto ask = augment_ask(typed, -1.0, std::nullopt);
  CHECK(validate_model(ask.model).empty());
  for (Index x = 0; x < base.x_count(); ++x) {
    for (Index y = 0; y < ask.model.y_count(); ++y) {
      for (const Branch& b : ask.model.branches(ask.ask_action(), x, y)) {
        CHECK(b.x_next == x);
        for (const Entry& e : ask.model.hidden(b)) CHECK(e.index == y);
      }
    }
  }
}

TEST_CASE("asking in Tag lets the opponent move") {
  const auto base = make_tag({});
  const auto typed = augment_types(base, SuggesterSpec::singleton(1.0), mdp_q(base), false);
  const auto ask = augment_ask(typed, -1.0, 1);
  CHECK(validate_model(ask.model).empty());
  const Index x = ask.visible(0, 1);
  const Index y = 20;  // opponent away from the agent
  std::size_t moved = 0;
  for (const Branch& b : ask.model.branches(ask.ask_action(), x, y)) {
    CHECK(ask.base_x(b.x_next) == 0);
    CHECK(ask.counter(b.x_next) == std::optional<std::size_t>(0));
    for (const Entry& e : ask.model.hidden(b)) moved += e.index != y;
  }
  CHECK(moved > 0);
}

TEST_CASE("two-stage pipeline on a one-state model") {
  const auto base = single_state_idle();
  const auto dir = std::filesystem::temp_directory_path() / "advisor_pipeline_test";
  std::filesystem::remove_all(dir);
  AugmentSpec spec;
  spec.spec = SuggesterSpec::standard();
  spec.ask = true;
  spec.c_ask = -1.0;
  const StageSettings s{1e-6, 10.0, 0};
  const auto first = bootstrap_pipeline(base, spec, s, s, dir);
  CHECK_FALSE(first.loaded);
  CHECK_FALSE(first.base.loaded);
  const double v1 = initial_value(base, first.base.policy);
  const double v2 = initial_value(first.model(), first.policy);
  CHECK(v1 == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(v2 == doctest::Approx(v1).epsilon(1e-6));

  const auto again = bootstrap_pipeline(base, spec, s, s, dir);
  CHECK(again.loaded);
  CHECK(again.base.loaded);
  CHECK(initial_value(again.model(), again.policy) == doctest::Approx(v2).epsilon(1e-12));

  // Different settings invalidate the cached stage.
  const auto fresh = bootstrap_pipeline(base, spec, s, {1e-5, 10.0, 1}, dir);
  CHECK(fresh.base.loaded);
  CHECK_FALSE(fresh.loaded);
  std::filesystem::remove_all(dir);
}
