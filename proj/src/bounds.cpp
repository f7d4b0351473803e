#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "advisor/error.hpp"
#include "advisor/solver.hpp"

namespace advisor {

namespace {

std::pair<double, double> reward_range(const MomdpModel& m) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Index x = 0; x < m.x_count(); ++x) {
    for (Index y = 0; y < m.y_count(); ++y) {
      for (Index a = 0; a < m.action_count(); ++a) {
        lo = std::min(lo, m.reward(x, y, a));
        hi = std::max(hi, m.reward(x, y, a));
      }
    }
  }
  return {lo, hi};
}

// Expected next-state value sum_s' T(s,a,s') V(s') over the factored rows.
double expected_next(const MomdpModel& m, Index a, Index x, Index y, const std::vector<double>& v) {
  const std::size_t Y = m.y_count();
  double acc = 0.0;
  for (const Branch& b : m.branches(a, x, y)) {
    double inner = 0.0;
    const double* row = v.data() + static_cast<std::size_t>(b.x_next) * Y;
    for (const Entry& e : m.hidden(b)) inner += e.prob * row[e.index];
    acc += b.prob * inner;
  }
  return acc;
}

}  // namespace

std::vector<std::vector<double>> blind_values(const MomdpModel& m, double tolerance,
                                              std::size_t max_iterations) {
  const std::size_t X = m.x_count(), Y = m.y_count(), A = m.action_count();
  const double gamma = m.discount();
  const auto [r_lo, r_hi] = reward_range(m);
  (void)r_hi;
  const double start = std::min(0.0, r_lo) / (1.0 - gamma);

  std::vector<std::vector<double>> out(A);
  for (Index a = 0; a < A; ++a) {
    std::vector<double> v(X * Y, start);
    for (Index x = 0; x < X; ++x) {
      for (Index y = 0; y < Y; ++y) {
        if (m.terminal(x, y)) v[x * Y + y] = 0.0;
      }
    }
    for (std::size_t it = 0; it < max_iterations; ++it) {
      double delta = 0.0;
      for (Index x = 0; x < X; ++x) {
        const Index act = m.feasible(x, a) ? a : m.first_feasible(x);
        for (Index y = 0; y < Y; ++y) {
          if (m.terminal(x, y)) continue;
          const double nv = m.reward(x, y, act) + gamma * expected_next(m, act, x, y, v);
          delta = std::max(delta, std::abs(nv - v[x * Y + y]));
          // In-place sweeps from below stay below the fixed point.
          v[x * Y + y] = std::max(v[x * Y + y], nv);
        }
      }
      if (delta < tolerance) break;
    }
    out[a] = std::move(v);
  }
  return out;
}

QTable mdp_q(const MomdpModel& m, double tolerance, std::size_t max_iterations) {
  const std::size_t X = m.x_count(), Y = m.y_count(), A = m.action_count();
  const double gamma = m.discount();
  QTable q{X, Y, A, std::vector<double>(X * Y * A, 0.0)};
  std::vector<double> v(X * Y, 0.0);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    double delta = 0.0;
    for (Index x = 0; x < X; ++x) {
      for (Index y = 0; y < Y; ++y) {
        const std::size_t s = x * Y + y;
        if (m.terminal(x, y)) {
          for (Index a = 0; a < A; ++a) q.values[s * A + a] = 0.0;
          continue;
        }
        double best = -std::numeric_limits<double>::infinity();
        for (Index a = 0; a < A; ++a) {
          const double qa = m.reward(x, y, a) + gamma * expected_next(m, a, x, y, v);
          q.values[s * A + a] = qa;
          if (m.feasible(x, a)) best = std::max(best, qa);
        }
        delta = std::max(delta, std::abs(best - v[s]));
        v[s] = best;
      }
    }
    if (delta < tolerance) break;
  }
  return q;
}

QTable fast_informed_bound(const MomdpModel& m, double tolerance, std::size_t max_iterations,
                           double time_limit) {
  const std::size_t X = m.x_count(), Y = m.y_count(), A = m.action_count(),
                    O = m.observation_count();
  const double gamma = m.discount();
  const auto [r_lo, r_hi] = reward_range(m);
  (void)r_lo;
  const double start = std::max(0.0, r_hi) / (1.0 - gamma);
  QTable q{X, Y, A, std::vector<double>(X * Y * A, start)};
  for (Index x = 0; x < X; ++x) {
    for (Index y = 0; y < Y; ++y) {
      if (!m.terminal(x, y)) continue;
      for (Index a = 0; a < A; ++a) q.values[(x * Y + y) * A + a] = 0.0;
    }
  }

  // acc[(branch * O + o) * A + a'] accumulates sum_y' T O Q(x', y', a').
  std::vector<double> acc;
  std::vector<std::uint32_t> touched;
  std::vector<char> is_touched;
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t it = 0; it < max_iterations; ++it) {
    double delta = 0.0;
    for (Index x = 0; x < X; ++x) {
      for (Index y = 0; y < Y; ++y) {
        if (m.terminal(x, y)) continue;
        const std::size_t s = x * Y + y;
        for (Index a = 0; a < A; ++a) {
          const auto branches = m.branches(a, x, y);
          const std::size_t slots = branches.size() * O;
          if (acc.size() < slots * A) {
            acc.assign(slots * A, 0.0);
            is_touched.assign(slots, 0);
          }
          for (std::size_t bi = 0; bi < branches.size(); ++bi) {
            const Branch& b = branches[bi];
            for (const Entry& hy : m.hidden(b)) {
              const double w = b.prob * hy.prob;
              if (w == 0.0) continue;
              const double* qn = q.values.data() + (b.x_next * Y + hy.index) * A;
              for (const Entry& eo : m.observation_row(a, b.x_next, hy.index)) {
                const double wo = w * eo.prob;
                if (wo == 0.0) continue;
                const std::uint32_t slot = static_cast<std::uint32_t>(bi * O + eo.index);
                if (!is_touched[slot]) {
                  is_touched[slot] = 1;
                  touched.push_back(slot);
                }
                double* dst = acc.data() + static_cast<std::size_t>(slot) * A;
                for (Index ap = 0; ap < A; ++ap) dst[ap] += wo * qn[ap];
              }
            }
          }
          double future = 0.0;
          for (std::uint32_t slot : touched) {
            const Index xn = branches[slot / O].x_next;
            double* src = acc.data() + static_cast<std::size_t>(slot) * A;
            double best = -std::numeric_limits<double>::infinity();
            for (Index ap = 0; ap < A; ++ap) {
              if (m.feasible(xn, ap)) best = std::max(best, src[ap]);
              src[ap] = 0.0;
            }
            future += best;
            is_touched[slot] = 0;
          }
          touched.clear();
          const double nq = m.reward(x, y, a) + gamma * future;
          double& cur = q.values[s * A + a];
          delta = std::max(delta, std::abs(cur - nq));
          cur = std::min(cur, nq);
        }
      }
    }
    if (delta < tolerance) break;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > time_limit) break;
  }
  return q;
}

QTable extract_q(const MomdpModel& m, const AlphaPolicy& policy) {
  const std::size_t X = m.x_count(), Y = m.y_count(), A = m.action_count();
  if (policy.y_count != Y || policy.sets.size() != X) {
    throw Error(ErrorCode::DimensionMismatch, "policy dimensions do not match model");
  }
  std::vector<double> v(X * Y, 0.0);
  for (Index x = 0; x < X; ++x) {
    for (Index y = 0; y < Y; ++y) v[x * Y + y] = point_value(policy, x, y);
  }
  QTable q{X, Y, A, std::vector<double>(X * Y * A, 0.0)};
  const double gamma = m.discount();
  for (Index x = 0; x < X; ++x) {
    for (Index y = 0; y < Y; ++y) {
      for (Index a = 0; a < A; ++a) {
        q.values[(x * Y + y) * A + a] = m.reward(x, y, a) + gamma * expected_next(m, a, x, y, v);
      }
    }
  }
  return q;
}

}  // namespace advisor
