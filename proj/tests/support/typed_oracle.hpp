#pragma once

// Brute-force typed model: the flat base matrices crossed with the type
// chain by explicit tensor products, and a posterior that sums over every
// (s, s') pair. Shares nothing with augment_types or joint_update.

#include <cmath>
#include <random>
#include <vector>

#include "advisor/momdp.hpp"
#include "advisor/solver.hpp"
#include "support/oracles.hpp"

namespace advisor::testing {

struct TypedOracle {
  DenseFlat base;
  std::vector<double> types;
  double t_p = 0.0;
  std::size_t m = 0;
  std::vector<double> P;      // [k * m + k']
  std::vector<double> sigma;  // [(s * m + k) * A + a]
  std::vector<char> terminal; // [s]
  bool per_step = true;

  std::size_t S() const { return base.S * m; }
  std::size_t symbols() const { return base.A + 1; }

  double t(std::size_t a, std::size_t s, std::size_t k, std::size_t sp, std::size_t kp) const {
    const double pk = terminal[s] ? (k == kp ? 1.0 : 0.0) : P[k * m + kp];
    return base.t(a, s, sp) * pk;
  }
  double sigma_prob(std::size_t s, std::size_t k, std::size_t a) const {
    return sigma[(s * m + k) * base.A + a];
  }
  /// Composite observation probability; sigma == A means Absent.
  double z(std::size_t a, std::size_t sp, std::size_t kp, std::size_t o, std::size_t sg) const {
    const double zo = base.z(a, sp, o);
    if (!per_step) return sg == base.A ? zo : 0.0;
    return sg == base.A ? 0.0 : zo * sigma_prob(sp, kp, sg);
  }
};

inline TypedOracle typed_oracle(const MomdpModel& base, const QTable& q,
                                const std::vector<double>& types, double t_p, bool per_step) {
  TypedOracle o;
  o.base = dense_flat(base);
  o.types = types;
  o.t_p = t_p;
  o.m = types.size();
  o.per_step = per_step;
  o.P.assign(o.m * o.m, 0.0);
  for (std::size_t i = 0; i < o.m; ++i) {
    for (std::size_t j = 0; j < o.m; ++j) {
      o.P[i * o.m + j] = i == j ? 1.0 - t_p : t_p / static_cast<double>(o.m - 1);
    }
  }
  o.terminal.assign(o.base.S, 0);
  const std::size_t A = o.base.A;
  o.sigma.assign(o.base.S * o.m * A, 0.0);
  for (std::size_t s = 0; s < o.base.S; ++s) {
    const Index x = static_cast<Index>(s / o.base.Y), y = static_cast<Index>(s % o.base.Y);
    o.terminal[s] = base.terminal(x, y);
    for (std::size_t k = 0; k < o.m; ++k) {
      long double total = 0.0L;
      std::vector<long double> w(A, 0.0L);
      for (std::size_t a = 0; a < A; ++a) {
        if (!base.feasible(x, static_cast<Index>(a))) continue;
        w[a] = std::exp(static_cast<long double>(types[k]) * q.at(s, a));
        total += w[a];
      }
      for (std::size_t a = 0; a < A; ++a) o.sigma[(s * o.m + k) * A + a] = static_cast<double>(w[a] / total);
    }
  }
  return o;
}

/// Posterior over flat typed states after (a, o, sigma). `sg` == A marginalizes
/// the suggestion symbol. Returns an empty vector for zero likelihood.
inline std::vector<double> typed_posterior(const TypedOracle& d, const std::vector<double>& b,
                                           std::size_t a, std::size_t o, std::size_t sg) {
  const std::size_t Sb = d.base.S, m = d.m, A = d.base.A;
  std::vector<long double> raw(Sb * m, 0.0L);
  long double total = 0.0L;
  for (std::size_t sp = 0; sp < Sb; ++sp) {
    for (std::size_t kp = 0; kp < m; ++kp) {
      long double pred = 0.0L;
      for (std::size_t s = 0; s < Sb; ++s) {
        for (std::size_t k = 0; k < m; ++k) pred += static_cast<long double>(b[s * m + k]) * d.t(a, s, k, sp, kp);
      }
      long double like = 0.0L;
      if (sg == A) {
        for (std::size_t g = 0; g <= A; ++g) like += d.z(a, sp, kp, o, g);
      } else {
        like = d.z(a, sp, kp, o, sg);
      }
      const long double v = pred * like;
      raw[sp * m + kp] = v;
      total += v;
    }
  }
  if (total <= 0.0L) return {};
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<double>(raw[i] / total);
  return out;
}

}  // namespace advisor::testing
