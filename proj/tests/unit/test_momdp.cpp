#include <doctest.h>

#include <random>

#include "advisor/error.hpp"
#include "advisor/momdp.hpp"
#include "advisor/policy.hpp"
#include "advisor/solver.hpp"
#include "support/oracles.hpp"
#include "support/toy_models.hpp"

using namespace advisor;
using namespace advisor::testing;

TEST_CASE("validate_model accepts a well-formed chain") {
  CHECK(validate_model(deterministic_chain(2)).empty());
  CHECK(validate_model(tiger()).empty());
}

TEST_CASE("validate_model names a row that does not sum to one") {
  ModelBuilder b(1, 2, {"a"}, {"o"}, 0.9);
  b.set_transition(0, 0, 0, {{0, 1.0, {{0, 0.5}, {1, 0.48}}}});
  b.set_transition(0, 0, 1, {{0, 1.0, {{1, 1.0}}}});
  b.set_observation(0, 0, 0, {{0, 1.0}});
  b.set_observation(0, 0, 1, {{0, 1.0}});
  b.set_initial({{0, 0, 1.0}});
  const auto v = validate_model(std::move(b).build());
  REQUIRE(v.size() == 1);
  CHECK(v[0].table == "t_y");
  CHECK(v[0].indices == std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(v[0].residual == doctest::Approx(-0.02));
}

TEST_CASE("validate_model flags negative probabilities") {
  ModelBuilder b(1, 2, {"a"}, {"o", "p"}, 0.9);
  b.set_transition(0, 0, 0, {{0, 1.0, {{0, 1.0}}}});
  b.set_transition(0, 0, 1, {{0, 1.0, {{1, 1.0}}}});
  b.set_observation(0, 0, 0, {{0, 1.2}, {1, -0.2}});
  b.set_observation(0, 0, 1, {{0, 1.0}});
  b.set_initial({{0, 0, 1.0}});
  const auto v = validate_model(std::move(b).build());
  REQUIRE(!v.empty());
  bool negative = false;
  for (const auto& viol : v) negative = negative || (viol.table == "obs" && viol.residual < 0.0);
  CHECK(negative);
}

TEST_CASE("validate_model checks discount and terminal self-loops") {
  ModelBuilder b(1, 2, {"a"}, {"o"}, 1.0);
  b.set_transition(0, 0, 0, {{0, 1.0, {{1, 1.0}}}});
  b.set_transition(0, 0, 1, {{0, 1.0, {{1, 1.0}}}});
  b.set_observation(0, 0, 0, {{0, 1.0}});
  b.set_observation(0, 0, 1, {{0, 1.0}});
  b.set_terminal(0, 0);
  b.set_initial({{0, 0, 1.0}});
  const auto v = validate_model(std::move(b).build());
  bool discount = false, loop = false;
  for (const auto& viol : v) {
    discount = discount || viol.table == "discount";
    loop = loop || viol.table == "terminal";
  }
  CHECK(discount);
  CHECK(loop);
}

TEST_CASE("belief_update on a deterministic chain moves a point mass") {
  const auto m = deterministic_chain(3);
  const FactoredBelief b{0, {1.0, 0.0, 0.0}};
  const auto post = belief_update(m, b, 0, 0, 1);
  CHECK(post.x == 0);
  CHECK(post.b_y == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("belief_update with uninformative observations returns the predicted prior") {
  ModelBuilder b(1, 2, {"a"}, {"o1", "o2"}, 0.9);
  b.set_transition(0, 0, 0, {{0, 1.0, {{0, 0.7}, {1, 0.3}}}});
  b.set_transition(0, 0, 1, {{0, 1.0, {{0, 0.2}, {1, 0.8}}}});
  for (Index y = 0; y < 2; ++y) b.set_observation(0, 0, y, {{0, 0.5}, {1, 0.5}});
  b.set_initial({{0, 0, 0.5}, {0, 1, 0.5}});
  const auto m = std::move(b).build();
  const auto post = belief_update(m, {0, {0.5, 0.5}}, 0, 0, 1);
  CHECK(post.b_y[0] == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(post.b_y[1] == doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("belief_update signals ZeroLikelihood") {
  const auto m = deterministic_chain(2);
  try {
    belief_update(m, {0, {1.0, 0.0}}, 0, 0, 0);
    FAIL("expected ZeroLikelihood");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroLikelihood);
  }
  CHECK_FALSE(try_belief_update(m, {0, {1.0, 0.0}}, 0, 0, 0).has_value());
}

TEST_CASE("belief_update matches brute-force flat enumeration on random models") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t X = 1 + trial % 3, Y = 3, A = 2, O = 3;
    const auto m = random_model(rng, X, Y, A, O);
    REQUIRE(validate_model(m).empty());
    const DenseFlat d = dense_flat(m);
    const Index x = static_cast<Index>(rng() % X);
    FactoredBelief b{x, random_simplex(rng, Y)};
    std::vector<double> flat(d.S, 0.0);
    for (Index y = 0; y < Y; ++y) flat[x * Y + y] = b.b_y[y];
    const Index a = static_cast<Index>(rng() % A);
    const Index o = static_cast<Index>(rng() % O);
    const auto joint = flat_posterior(d, flat, a, o);
    // Marginal of x' under the flat posterior, then condition on x_next.
    for (Index xn = 0; xn < X; ++xn) {
      double mass = 0.0;
      for (Index y = 0; y < Y; ++y) mass += joint[xn * Y + y];
      if (mass < 1e-9) continue;
      const auto post = try_belief_update(m, b, a, xn, o);
      REQUIRE(post.has_value());
      double total = 0.0;
      for (Index y = 0; y < Y; ++y) {
        CHECK(post->b_y[y] == doctest::Approx(joint[xn * Y + y] / mass).epsilon(1e-12));
        total += post->b_y[y];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("scaling an observation row leaves the posterior unchanged") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t Y = 4;
    const auto ty = random_simplex(rng, Y);
    const auto like = random_simplex(rng, Y);
    const double scale = 0.1 + 0.8 * std::uniform_real_distribution<double>(0, 1)(rng);
    auto build = [&](double factor) {
      ModelBuilder b(1, Y, {"a"}, {"hit", "miss"}, 0.9);
      for (Index y = 0; y < Y; ++y) {
        b.set_transition(0, 0, y, {{0, 1.0, to_row(ty)}});
        const double p = like[y] * factor;
        b.set_observation(0, 0, y, {{0, p}, {1, 1.0 - p}});
      }
      b.set_initial({{0, 0, 1.0}});
      return std::move(b).build();
    };
    const auto m1 = build(1.0), m2 = build(scale);
    const FactoredBelief b{0, random_simplex(rng, Y)};
    const auto p1 = belief_update(m1, b, 0, 0, 0), p2 = belief_update(m2, b, 0, 0, 0);
    for (Index y = 0; y < Y; ++y) CHECK(p1.b_y[y] == doctest::Approx(p2.b_y[y]).epsilon(1e-12));
  }
}

TEST_CASE("FlatPomdpView rows are stochastic and rewards agree") {
  std::mt19937_64 rng(3);
  const auto m = random_model(rng, 2, 3, 2, 2);
  const FlatPomdpView view(m);
  CHECK(view.state_count() == 6);
  for (Index s = 0; s < view.state_count(); ++s) {
    for (Index a = 0; a < 2; ++a) {
      double total = 0.0;
      for (const Entry& e : view.transition(s, a)) total += e.prob;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(view.reward(s, a) == m.reward(view.x_of(s), view.y_of(s), a));
    }
  }
}

namespace {

AlphaPolicy one_state_policy(std::vector<std::pair<std::vector<double>, Index>> vectors) {
  AlphaPolicy p;
  p.y_count = vectors.front().first.size();
  p.sets.resize(1);
  p.sets[0].dim = p.y_count;
  for (auto& [v, a] : vectors) p.sets[0].add(v, a);
  return p;
}

}  // namespace

TEST_CASE("belief_value examples") {
  CHECK(belief_value(one_state_policy({{{0.0, 0.0}, 0}}), {0, {0.3, 0.7}}) == 0.0);
  const auto p = one_state_policy({{{1.0, 5.0}, 0}, {{4.0, 2.0}, 1}});
  CHECK(belief_value(p, {0, {1.0, 0.0}}) == 4.0);
  CHECK(belief_value(p, {0, {0.0, 1.0}}) == 5.0);
  // Hand enumeration at (0.6, 0.4): 0.6 + 2.0 = 2.6 vs 2.4 + 0.8 = 3.2.
  CHECK(belief_value(p, {0, {0.6, 0.4}}) == doctest::Approx(3.2));
  CHECK(greedy_action(p, {0, {0.6, 0.4}}) == 1);
}

TEST_CASE("belief_value and greedy_action report NoVectors") {
  AlphaPolicy empty;
  empty.y_count = 2;
  empty.sets.resize(1);
  empty.sets[0].dim = 2;
  CHECK_THROWS_AS(belief_value(empty, {0, {0.5, 0.5}}), Error);
  CHECK_THROWS_AS(greedy_action(empty, {3, {0.5, 0.5}}), Error);
}

TEST_CASE("greedy_action tags and tie-breaking") {
  CHECK(greedy_action(one_state_policy({{{1.0, 1.0}, 2}}), {0, {0.5, 0.5}}) == 2);
  CHECK(greedy_action(one_state_policy({{{1.0, 2.0}, 3}, {{1.0, 2.0}, 1}}), {0, {0.5, 0.5}}) == 1);
}

TEST_CASE("greedy_action is invariant to a common offset") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<std::vector<double>, Index>> vs, shifted;
    const double c = u(rng);
    for (Index a = 0; a < 4; ++a) {
      std::vector<double> v{u(rng), u(rng), u(rng)};
      std::vector<double> w = v;
      for (auto& e : w) e += c;
      vs.push_back({v, a});
      shifted.push_back({w, a});
    }
    const FactoredBelief b{0, random_simplex(rng, 3)};
    CHECK(greedy_action(one_state_policy(vs), b) == greedy_action(one_state_policy(shifted), b));
  }
}

TEST_CASE("solved tiger picks the 3-step expectimax action at its initial belief") {
  const auto m = tiger();
  SolveParams params;
  params.target_precision = 1e-3;
  params.time_budget = 20.0;
  const auto policy = solve(m, params);
  const DenseFlat d = dense_flat(m);
  const auto oracle = expectimax(d, {0.5, 0.5}, 3);
  CHECK(greedy_action(policy, initial_belief(m, 0)) == oracle.action);
  CHECK(oracle.action == 0);
}
