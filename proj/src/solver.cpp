#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "advisor/error.hpp"
#include "advisor/solver.hpp"

namespace advisor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCrossTolerance = 1e-6;
constexpr double kImprovement = 1e-12;
constexpr std::size_t kMaxStoredBeliefs = 4000;

struct SparseBelief {
  std::vector<Index> idx;
  std::vector<double> val;
};

/// 64-bit signature of a support set; a subset's bits are a subset.
std::uint64_t support_mask(const SparseBelief& b) {
  std::uint64_t m = 0;
  for (Index i : b.idx) m |= std::uint64_t{1} << (i & 63U);
  return m;
}

struct UpperPoint {
  SparseBelief belief;
  double value;
  double corner_dot;
  std::uint64_t mask;
};

struct Child {
  Index x_next;
  Index o;
  double prob;
  SparseBelief belief;
  double upper = 0.0;
  double lower = 0.0;
};

struct Expansion {
  Index action;
  double reward;  // expected immediate reward under b
  std::vector<Child> children;
  double q_upper = 0.0;
};

/// Dense scratch vector with a list of touched indices.
struct Scratch {
  std::vector<double> v;
  std::vector<Index> touched;
  void resize(std::size_t n) { v.assign(n, 0.0); }
  void add(Index i, double w) {
    if (v[i] == 0.0) touched.push_back(i);
    v[i] += w;
    if (v[i] == 0.0) v[i] = std::numeric_limits<double>::denorm_min();
  }
  void clear() {
    for (Index i : touched) v[i] = 0.0;
    touched.clear();
  }
};

class Solver {
 public:
  Solver(const MomdpModel& m, const SolveParams& p)
      : m_(m), p_(p), X_(m.x_count()), Y_(m.y_count()), A_(m.action_count()),
        O_(m.observation_count()), gamma_(m.discount()) {}

  AlphaPolicy run();

 private:
  void initialize();
  void add_vector(Index x, std::vector<double>& alpha, Index action);
  void maybe_prune(Index x);
  void maybe_prune_points(Index x);
  void remove_vectors(Index x, const std::vector<char>& drop);
  const double* default_vector(Index x);

  double lower_at(Index x, const SparseBelief& b) const;
  double upper_at(Index x, const SparseBelief& b);
  void load_dense(const SparseBelief& b);
  void unload_dense(const SparseBelief& b);

  void expand(Index x, const SparseBelief& b, Index a, Expansion& out);
  /// Backs up both bounds at (x, b). Returns the index into `expansions` of
  /// the action maximizing the upper bound.
  std::size_t update(Index x, const SparseBelief& b, std::vector<Expansion>& expansions);
  void explore(Index x, const SparseBelief& b);

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
  bool out_of_budget() const {
    return elapsed() > p_.time_budget || (p_.max_backups > 0 && backups_ >= p_.max_backups);
  }
  void refresh_stats();

  const MomdpModel& m_;
  SolveParams p_;
  std::size_t X_, Y_, A_, O_;
  double gamma_;
  std::chrono::steady_clock::time_point t0_;

  std::vector<AlphaSet> lower_;
  std::vector<std::size_t> pruned_size_;
  std::vector<std::vector<SparseBelief>> sampled_;
  std::vector<std::size_t> sampled_cursor_;
  std::vector<std::vector<double>> default_cache_;
  std::vector<char> default_valid_;
  std::vector<std::uint64_t> default_id_;

  // Vectors referenced by a live vector's backup are never witness-pruned.
  std::vector<std::vector<std::uint64_t>> ids_;
  std::vector<std::vector<std::vector<std::uint64_t>>> children_;
  std::unordered_map<std::uint64_t, std::size_t> refs_;
  std::uint64_t next_id_ = 0;
  std::vector<std::uint64_t> pending_children_;

  std::vector<std::vector<double>> corner_;
  std::vector<std::vector<UpperPoint>> points_;
  std::vector<std::size_t> points_pruned_;

  struct Root {
    Index x;
    double weight;
    SparseBelief belief;
    double lower = 0.0, upper = 0.0;
  };
  std::vector<Root> roots_;
  std::size_t max_depth_ = 0;
  double epsilon_ = 0.0;

  std::vector<double> dense_;  // belief loaded for sawtooth lookups
  Scratch pred_;
  std::vector<Scratch> child_scratch_;
  std::vector<double> alpha_buf_;

  std::size_t backups_ = 0;
  std::size_t iterations_ = 0;
  SolveStats stats_;
};

void Solver::initialize() {
  lower_.assign(X_, AlphaSet{});
  for (auto& s : lower_) s.dim = Y_;
  pruned_size_.assign(X_, 0);
  sampled_.assign(X_, {});
  sampled_cursor_.assign(X_, 0);
  default_cache_.assign(X_, {});
  default_valid_.assign(X_, 0);
  default_id_.assign(X_, 0);
  ids_.assign(X_, {});
  children_.assign(X_, {});
  refs_.clear();
  dense_.assign(Y_, 0.0);
  pred_.resize(Y_);

  const auto blind = blind_values(m_);
  std::vector<double> alpha(Y_);
  for (Index a = 0; a < A_; ++a) {
    for (Index x = 0; x < X_; ++x) {
      std::copy(blind[a].begin() + x * Y_, blind[a].begin() + (x + 1) * Y_, alpha.begin());
      const Index tag = m_.feasible(x, a) ? a : m_.first_feasible(x);
      add_vector(x, alpha, tag);
    }
  }
  for (Index x = 0; x < X_; ++x) pruned_size_[x] = lower_[x].size();

  const QTable fib = fast_informed_bound(m_, 1e-6, 100000, 0.25 * p_.time_budget);
  corner_.assign(X_, std::vector<double>(Y_, 0.0));
  for (Index x = 0; x < X_; ++x) {
    for (Index y = 0; y < Y_; ++y) {
      double best = -kInf;
      for (Index a = 0; a < A_; ++a) {
        if (m_.feasible(x, a)) best = std::max(best, fib.at(x * Y_ + y, a));
      }
      corner_[x][y] = best;
    }
  }
  points_.assign(X_, {});
  points_pruned_.assign(X_, 0);

  const std::vector<double> px = initial_visible(m_);
  double r_lo = kInf, r_hi = -kInf;
  for (Index x = 0; x < X_; ++x) {
    for (Index y = 0; y < Y_; ++y) {
      for (Index a = 0; a < A_; ++a) {
        r_lo = std::min(r_lo, m_.reward(x, y, a));
        r_hi = std::max(r_hi, m_.reward(x, y, a));
      }
    }
  }
  for (Index x = 0; x < X_; ++x) {
    if (px[x] <= 0.0) continue;
    FactoredBelief fb = initial_belief(m_, x);
    Root r{x, px[x], {}};
    for (Index y = 0; y < Y_; ++y) {
      if (fb.b_y[y] > 0.0) {
        r.belief.idx.push_back(y);
        r.belief.val.push_back(fb.b_y[y]);
      }
    }
    roots_.push_back(std::move(r));
  }

  epsilon_ = p_.target_precision;
  const double span = std::max(1e-12, (r_hi - r_lo) / (1.0 - gamma_));
  if (gamma_ <= 0.0) {
    max_depth_ = 1;
  } else {
    const double depth = std::log(span / epsilon_) / std::log(1.0 / gamma_);
    max_depth_ = static_cast<std::size_t>(std::clamp(depth + 2.0, 1.0, 2000.0));
  }
}

void Solver::add_vector(Index x, std::vector<double>& alpha, Index action) {
  AlphaSet& set = lower_[x];
  // Skip if pointwise dominated; drop vectors the new one dominates.
  std::vector<char> drop(set.size(), 0);
  bool any_drop = false;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double* v = set.values.data() + i * Y_;
    bool new_le = true, old_le = true;
    for (std::size_t y = 0; y < Y_ && (new_le || old_le); ++y) {
      if (alpha[y] > v[y] + kImprovement) new_le = false;
      if (v[y] > alpha[y] + kImprovement) old_le = false;
    }
    if (new_le) {
      pending_children_.clear();
      return;
    }
    if (old_le) {
      drop[i] = 1;
      any_drop = true;
    }
  }
  if (any_drop) remove_vectors(x, drop);
  set.add(alpha, action);
  const std::uint64_t id = next_id_++;
  ids_[x].push_back(id);
  refs_.emplace(id, 0);
  for (std::uint64_t c : pending_children_) {
    if (auto it = refs_.find(c); it != refs_.end()) ++it->second;
  }
  children_[x].push_back(std::move(pending_children_));
  pending_children_.clear();
  default_valid_[x] = 0;
  maybe_prune(x);
}

void Solver::remove_vectors(Index x, const std::vector<char>& drop) {
  auto& ids = ids_[x];
  auto& kids = children_[x];
  std::size_t w = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (drop[i]) {
      for (std::uint64_t c : kids[i]) {
        if (auto it = refs_.find(c); it != refs_.end()) --it->second;
      }
      refs_.erase(ids[i]);
      continue;
    }
    if (w != i) {
      ids[w] = ids[i];
      kids[w] = std::move(kids[i]);
    }
    ++w;
  }
  ids.resize(w);
  kids.resize(w);
  lower_[x].remove_if_flagged(drop);
}

void Solver::maybe_prune(Index x) {
  AlphaSet& set = lower_[x];
  if (set.size() < std::max<std::size_t>(32, 2 * pruned_size_[x])) return;
  const auto& beliefs = sampled_[x];
  if (beliefs.empty()) {
    pruned_size_[x] = set.size();
    return;
  }
  // Keep only vectors that are maximal at some sampled belief.
  std::vector<char> keep(set.size(), 0);
  std::vector<const SparseBelief*> witnesses;
  for (const SparseBelief& b : beliefs) witnesses.push_back(&b);
  for (const Root& r : roots_) {
    if (r.x == x) witnesses.push_back(&r.belief);
  }
  for (const SparseBelief* wb : witnesses) {
    const SparseBelief& b = *wb;
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const double* v = set.values.data() + i * Y_;
      double acc = 0.0;
      for (std::size_t k = 0; k < b.idx.size(); ++k) acc += v[b.idx[k]] * b.val[k];
      if (acc > best) {
        best = acc;
        arg = i;
      }
    }
    keep[arg] = 1;
  }
  // The newest vector was just backed up at a belief; always retain it.
  keep[set.size() - 1] = 1;
  std::vector<char> drop(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) drop[i] = !keep[i] && refs_.at(ids_[x][i]) == 0;
  remove_vectors(x, drop);
  pruned_size_[x] = set.size();
  default_valid_[x] = 0;
}

void Solver::maybe_prune_points(Index x) {
  auto& pts = points_[x];
  if (pts.size() < std::max<std::size_t>(64, 2 * points_pruned_[x])) return;
  // Drop points whose value the remaining ones already imply.
  std::vector<char> drop(pts.size(), 0);
  for (std::size_t i = pts.size(); i-- > 0;) {
    const UpperPoint& p = pts[i];
    load_dense(p.belief);
    double implied = p.corner_dot;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i || drop[j] || pts[j].belief.idx.size() > p.belief.idx.size() ||
          (pts[j].mask & ~p.mask) != 0) {
        continue;
      }
      double ratio = kInf;
      for (std::size_t k = 0; k < pts[j].belief.idx.size() && ratio > 0.0; ++k) {
        ratio = std::min(ratio, dense_[pts[j].belief.idx[k]] / pts[j].belief.val[k]);
      }
      if (ratio > 0.0) implied = std::min(implied, p.corner_dot + ratio * (pts[j].value - pts[j].corner_dot));
    }
    unload_dense(p.belief);
    if (implied <= p.value + kImprovement) drop[i] = 1;
  }
  std::size_t w = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (drop[i]) continue;
    if (w != i) pts[w] = std::move(pts[i]);
    ++w;
  }
  pts.resize(w);
  points_pruned_[x] = pts.size();
}

const double* Solver::default_vector(Index x) {
  if (!default_valid_[x]) {
    const AlphaSet& set = lower_[x];
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      double acc = 0.0;
      for (std::size_t y = 0; y < Y_; ++y) acc += set.values[i * Y_ + y];
      if (acc > best) {
        best = acc;
        arg = i;
      }
    }
    default_cache_[x].assign(set.values.begin() + arg * Y_, set.values.begin() + (arg + 1) * Y_);
    default_id_[x] = ids_[x][arg];
    default_valid_[x] = 1;
  }
  return default_cache_[x].data();
}

double Solver::lower_at(Index x, const SparseBelief& b) const {
  const AlphaSet& set = lower_[x];
  double best = -kInf;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double* v = set.values.data() + i * Y_;
    double acc = 0.0;
    for (std::size_t k = 0; k < b.idx.size(); ++k) acc += v[b.idx[k]] * b.val[k];
    best = std::max(best, acc);
  }
  return best;
}

void Solver::load_dense(const SparseBelief& b) {
  for (std::size_t k = 0; k < b.idx.size(); ++k) dense_[b.idx[k]] = b.val[k];
}
void Solver::unload_dense(const SparseBelief& b) {
  for (Index y : b.idx) dense_[y] = 0.0;
}

double Solver::upper_at(Index x, const SparseBelief& b) {
  const std::vector<double>& corner = corner_[x];
  double cdot = 0.0;
  for (std::size_t k = 0; k < b.idx.size(); ++k) cdot += corner[b.idx[k]] * b.val[k];
  double best = cdot;
  if (points_[x].empty()) return best;
  load_dense(b);
  const std::size_t support = b.idx.size();
  const std::uint64_t outside = ~support_mask(b);
  for (const UpperPoint& pt : points_[x]) {
    // A point only bounds b when its support lies inside b's support.
    if (pt.belief.idx.size() > support || (pt.mask & outside) != 0) continue;
    double ratio = kInf;
    for (std::size_t k = 0; k < pt.belief.idx.size(); ++k) {
      const double r = dense_[pt.belief.idx[k]] / pt.belief.val[k];
      if (r < ratio) {
        ratio = r;
        if (ratio == 0.0) break;
      }
    }
    if (ratio == 0.0) continue;
    best = std::min(best, cdot + ratio * (pt.value - pt.corner_dot));
  }
  unload_dense(b);
  return best;
}

void Solver::expand(Index x, const SparseBelief& b, Index a, Expansion& out) {
  out.action = a;
  out.children.clear();
  out.reward = 0.0;
  // Predicted joint mass over (x', y'); x' slots are few so scan linearly.
  std::vector<Index> xs;
  std::vector<std::vector<std::pair<Index, double>>> per_x;
  for (std::size_t k = 0; k < b.idx.size(); ++k) {
    const Index y = b.idx[k];
    const double w = b.val[k];
    out.reward += w * m_.reward(x, y, a);
    for (const Branch& br : m_.branches(a, x, y)) {
      std::size_t slot = 0;
      while (slot < xs.size() && xs[slot] != br.x_next) ++slot;
      if (slot == xs.size()) {
        xs.push_back(br.x_next);
        per_x.emplace_back();
      }
      const double wx = w * br.prob;
      for (const Entry& e : m_.hidden(br)) per_x[slot].push_back({e.index, wx * e.prob});
    }
  }
  if (child_scratch_.size() < O_) {
    child_scratch_.resize(O_);
    for (auto& s : child_scratch_) s.resize(Y_);
  }
  for (std::size_t slot = 0; slot < xs.size(); ++slot) {
    const Index xn = xs[slot];
    for (const auto& [y, w] : per_x[slot]) pred_.add(y, w);
    std::vector<Index> used_obs;
    for (Index y : pred_.touched) {
      const double w = pred_.v[y];
      for (const Entry& eo : m_.observation_row(a, xn, y)) {
        if (eo.prob == 0.0) continue;
        Scratch& cs = child_scratch_[eo.index];
        if (cs.touched.empty()) used_obs.push_back(eo.index);
        cs.add(y, w * eo.prob);
      }
    }
    pred_.clear();
    std::sort(used_obs.begin(), used_obs.end());
    for (Index o : used_obs) {
      Scratch& cs = child_scratch_[o];
      Child c{xn, o, 0.0, {}};
      std::sort(cs.touched.begin(), cs.touched.end());
      for (Index y : cs.touched) c.prob += cs.v[y];
      if (c.prob > 0.0) {
        c.belief.idx.reserve(cs.touched.size());
        c.belief.val.reserve(cs.touched.size());
        for (Index y : cs.touched) {
          c.belief.idx.push_back(y);
          c.belief.val.push_back(cs.v[y] / c.prob);
        }
        out.children.push_back(std::move(c));
      }
      cs.clear();
    }
  }
}

std::size_t Solver::update(Index x, const SparseBelief& b, std::vector<Expansion>& expansions) {
  expansions.clear();
  double best_upper = -kInf;
  std::size_t best_upper_idx = 0;
  double best_lower = -kInf;
  Index best_lower_action = 0;
  std::vector<double> best_alpha;

  struct PickTable {
    Index x_next;
    std::vector<const double*> picks;
    std::vector<std::uint64_t> ids;
  };
  std::vector<PickTable> tables;
  std::vector<std::uint64_t> best_children;
  alpha_buf_.assign(Y_, 0.0);

  for (Index a = 0; a < A_; ++a) {
    if (!m_.feasible(x, a)) continue;
    expansions.emplace_back();
    Expansion& ex = expansions.back();
    expand(x, b, a, ex);

    // Upper bound Q.
    double future_u = 0.0;
    for (Child& c : ex.children) {
      c.upper = upper_at(c.x_next, c.belief);
      future_u += c.prob * c.upper;
    }
    ex.q_upper = ex.reward + gamma_ * future_u;
    if (ex.q_upper > best_upper + kImprovement) {
      best_upper = ex.q_upper;
      best_upper_idx = expansions.size() - 1;
    }

    // Lower bound: pick the best successor vector per (x', o); pairs that
    // are unreachable under b fall back to a default vector of x'.
    tables.clear();
    auto table_for = [&](Index xn) -> PickTable& {
      for (auto& t : tables) {
        if (t.x_next == xn) return t;
      }
      const double* d = default_vector(xn);
      tables.push_back({xn, std::vector<const double*>(O_, d), std::vector<std::uint64_t>(O_, default_id_[xn])});
      return tables.back();
    };
    for (Child& c : ex.children) {
      const AlphaSet& set = lower_[c.x_next];
      double best = -kInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < set.size(); ++i) {
        const double* v = set.values.data() + i * Y_;
        double acc = 0.0;
        for (std::size_t k = 0; k < c.belief.idx.size(); ++k) acc += v[c.belief.idx[k]] * c.belief.val[k];
        if (acc > best) {
          best = acc;
          arg = i;
        }
      }
      c.lower = best;
      PickTable& t = table_for(c.x_next);
      t.picks[c.o] = set.values.data() + arg * Y_;
      t.ids[c.o] = ids_[c.x_next][arg];
    }

    for (Index y = 0; y < Y_; ++y) {
      double future = 0.0;
      for (const Branch& br : m_.branches(a, x, y)) {
        const std::vector<const double*>& picks = table_for(br.x_next).picks;
        double inner = 0.0;
        for (const Entry& hy : m_.hidden(br)) {
          double obs_sum = 0.0;
          for (const Entry& eo : m_.observation_row(a, br.x_next, hy.index)) {
            obs_sum += eo.prob * picks[eo.index][hy.index];
          }
          inner += hy.prob * obs_sum;
        }
        future += br.prob * inner;
      }
      alpha_buf_[y] = m_.reward(x, y, a) + gamma_ * future;
    }
    double value = 0.0;
    for (std::size_t k = 0; k < b.idx.size(); ++k) value += alpha_buf_[b.idx[k]] * b.val[k];
    if (value > best_lower + kImprovement) {
      best_lower = value;
      best_lower_action = a;
      best_alpha = alpha_buf_;
      best_children.clear();
      for (const PickTable& t : tables) best_children.insert(best_children.end(), t.ids.begin(), t.ids.end());
    }
  }
  ++backups_;

  // Record the belief for witness pruning.
  auto& stored = sampled_[x];
  if (stored.size() < kMaxStoredBeliefs) {
    stored.push_back(b);
  } else {
    stored[sampled_cursor_[x]++ % kMaxStoredBeliefs] = b;
  }

  const double current_lower = lower_at(x, b);
  if (best_lower > current_lower + kImprovement) {
    std::sort(best_children.begin(), best_children.end());
    best_children.erase(std::unique(best_children.begin(), best_children.end()), best_children.end());
    pending_children_ = std::move(best_children);
    add_vector(x, best_alpha, best_lower_action);
  }

  const double current_upper = upper_at(x, b);
  if (best_upper < current_upper - kImprovement) {
    double cdot = 0.0;
    for (std::size_t k = 0; k < b.idx.size(); ++k) cdot += corner_[x][b.idx[k]] * b.val[k];
    points_[x].push_back({b, best_upper, cdot, support_mask(b)});
    maybe_prune_points(x);
  }

  const double lo = std::max(best_lower, current_lower);
  const double hi = std::min(best_upper, current_upper);
  if (lo > hi + kCrossTolerance) {
    throw Error(ErrorCode::Diverged, "lower bound " + std::to_string(lo) +
                                         " exceeds upper bound " + std::to_string(hi) +
                                         " at visible state " + std::to_string(x));
  }
  return best_upper_idx;
}

void Solver::explore(Index x0, const SparseBelief& b0) {
  struct Frame {
    Index x;
    SparseBelief b;
  };
  std::vector<Frame> path;
  path.push_back({x0, b0});
  std::vector<Expansion> expansions;
  double threshold = epsilon_;
  for (std::size_t depth = 0; depth < max_depth_; ++depth) {
    const Frame& f = path.back();
    const double gap = upper_at(f.x, f.b) - lower_at(f.x, f.b);
    if (gap <= threshold) break;
    if (out_of_budget()) break;
    const std::size_t ai = update(f.x, f.b, expansions);
    if (expansions.empty()) break;
    const Expansion& ex = expansions[ai];
    const double next_threshold = threshold / gamma_;
    double best_score = 0.0;
    const Child* best = nullptr;
    for (const Child& c : ex.children) {
      const double excess = c.upper - c.lower - next_threshold;
      const double score = c.prob * excess;
      if (score > best_score) {
        best_score = score;
        best = &c;
      }
    }
    if (best == nullptr) break;
    path.push_back({best->x_next, best->belief});
    threshold = next_threshold;
  }
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    if (out_of_budget() && it != path.rend() - 1) continue;
    update(it->x, it->b, expansions);
  }
}

void Solver::refresh_stats() {
  double lo = 0.0, hi = 0.0;
  for (Root& r : roots_) {
    r.lower = lower_at(r.x, r.belief);
    r.upper = upper_at(r.x, r.belief);
    lo += r.weight * r.lower;
    hi += r.weight * r.upper;
  }
  stats_.lower_bound = lo;
  stats_.upper_bound = hi;
  stats_.precision = hi - lo;
  stats_.iterations = iterations_;
  stats_.backups = backups_;
  stats_.wall_time = elapsed();
  stats_.converged = stats_.precision <= p_.target_precision;
}

AlphaPolicy Solver::run() {
  t0_ = std::chrono::steady_clock::now();
  initialize();
  refresh_stats();
  if (p_.on_progress) p_.on_progress(stats_);
  while (!stats_.converged && !out_of_budget()) {
    // Explore from the root with the largest weighted excess gap.
    const Root* pick = nullptr;
    double best = 0.0;
    for (const Root& r : roots_) {
      const double excess = r.upper - r.lower - epsilon_;
      if (excess > 0.0 && r.weight * excess > best) {
        best = r.weight * excess;
        pick = &r;
      }
    }
    if (pick == nullptr) break;
    explore(pick->x, pick->belief);
    ++iterations_;
    refresh_stats();
    if (p_.on_progress) p_.on_progress(stats_);
  }
  refresh_stats();

  AlphaPolicy policy;
  policy.y_count = Y_;
  policy.sets = std::move(lower_);
  policy.stats = stats_;
  return policy;
}

}  // namespace

AlphaPolicy solve(const MomdpModel& model, const SolveParams& params) {
  if (!(params.target_precision > 0.0) || !(params.time_budget > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "target_precision and time_budget must be positive");
  }
  const auto violations = validate_model(model);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw Error(ErrorCode::InvalidModel, std::to_string(violations.size()) +
                                             " violation(s); first in " + v.table + ": " +
                                             v.message);
  }
  Solver solver(model, params);
  return solver.run();
}

}  // namespace advisor
