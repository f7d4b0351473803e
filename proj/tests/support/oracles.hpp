#pragma once

// Independent reference computations for tests. These work on dense flat
// matrices built straight from the model tables, so they share no code
// path with the factored belief update or the solver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "advisor/momdp.hpp"

namespace advisor::testing {

struct DenseFlat {
  std::size_t S = 0, A = 0, O = 0, Y = 0;
  double gamma = 0.0;
  std::vector<double> T;  // [(a * S + s) * S + s']
  std::vector<double> Z;  // [(a * S + s') * O + o]
  std::vector<double> R;  // [s * A + a]

  double t(std::size_t a, std::size_t s, std::size_t sp) const { return T[(a * S + s) * S + sp]; }
  double z(std::size_t a, std::size_t sp, std::size_t o) const { return Z[(a * S + sp) * O + o]; }
  double r(std::size_t s, std::size_t a) const { return R[s * A + a]; }
};

inline DenseFlat dense_flat(const MomdpModel& m) {
  DenseFlat d;
  d.Y = m.y_count();
  d.S = m.x_count() * m.y_count();
  d.A = m.action_count();
  d.O = m.observation_count();
  d.gamma = m.discount();
  d.T.assign(d.A * d.S * d.S, 0.0);
  d.Z.assign(d.A * d.S * d.O, 0.0);
  d.R.assign(d.S * d.A, 0.0);
  for (Index a = 0; a < d.A; ++a) {
    for (Index x = 0; x < m.x_count(); ++x) {
      for (Index y = 0; y < m.y_count(); ++y) {
        const std::size_t s = x * d.Y + y;
        d.R[s * d.A + a] = m.reward(x, y, a);
        for (const Branch& b : m.branches(a, x, y)) {
          for (const Entry& e : m.hidden(b)) {
            d.T[(a * d.S + s) * d.S + b.x_next * d.Y + e.index] += b.prob * e.prob;
          }
        }
        for (const Entry& e : m.observation_row(a, x, y)) d.Z[(a * d.S + s) * d.O + e.index] += e.prob;
      }
    }
  }
  return d;
}

/// Textbook flat POMDP update b'(s') ∝ O(o|a,s') sum_s T(s,a,s') b(s).
inline std::vector<double> flat_posterior(const DenseFlat& d, const std::vector<double>& b,
                                          std::size_t a, std::size_t o) {
  std::vector<double> out(d.S, 0.0);
  double total = 0.0;
  for (std::size_t sp = 0; sp < d.S; ++sp) {
    double acc = 0.0;
    for (std::size_t s = 0; s < d.S; ++s) acc += d.t(a, s, sp) * b[s];
    out[sp] = d.z(a, sp, o) * acc;
    total += out[sp];
  }
  for (auto& v : out) v /= total;
  return out;
}

struct LookaheadResult {
  double value;
  std::size_t action;
};

/// Finite-horizon expectimax over the flat belief tree, leaf value 0.
inline LookaheadResult expectimax(const DenseFlat& d, const std::vector<double>& b,
                                  std::size_t horizon) {
  if (horizon == 0) return {0.0, 0};
  LookaheadResult best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t a = 0; a < d.A; ++a) {
    double value = 0.0;
    for (std::size_t s = 0; s < d.S; ++s) value += b[s] * d.r(s, a);
    for (std::size_t o = 0; o < d.O; ++o) {
      std::vector<double> next(d.S, 0.0);
      double p_o = 0.0;
      for (std::size_t sp = 0; sp < d.S; ++sp) {
        double acc = 0.0;
        for (std::size_t s = 0; s < d.S; ++s) acc += d.t(a, s, sp) * b[s];
        next[sp] = d.z(a, sp, o) * acc;
        p_o += next[sp];
      }
      if (p_o <= 0.0) continue;
      for (auto& v : next) v /= p_o;
      value += d.gamma * p_o * expectimax(d, next, horizon - 1).value;
    }
    if (value > best.value + 1e-12) best = {value, a};
  }
  return best;
}

/// Tabular Q-value iteration on the flat MDP.
inline std::vector<double> q_value_iteration(const DenseFlat& d, double tol = 1e-12) {
  std::vector<double> q(d.S * d.A, 0.0), v(d.S, 0.0);
  for (int it = 0; it < 100000; ++it) {
    double delta = 0.0;
    for (std::size_t s = 0; s < d.S; ++s) {
      for (std::size_t a = 0; a < d.A; ++a) {
        double acc = d.r(s, a);
        for (std::size_t sp = 0; sp < d.S; ++sp) acc += d.gamma * d.t(a, s, sp) * v[sp];
        q[s * d.A + a] = acc;
      }
    }
    for (std::size_t s = 0; s < d.S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < d.A; ++a) best = std::max(best, q[s * d.A + a]);
      delta = std::max(delta, std::abs(best - v[s]));
      v[s] = best;
    }
    if (delta < tol) break;
  }
  return q;
}

}  // namespace advisor::testing
