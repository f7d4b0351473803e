#include "advisor/domains.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "advisor/error.hpp"

namespace advisor {

TagLayout TagLayout::standard() {
  TagLayout l;
  l.lookup.assign(static_cast<std::size_t>(l.columns * l.rows), -1);
  for (int row = 0; row < l.rows; ++row) {
    for (int col = 0; col < l.columns; ++col) {
      if (row >= 2 && (col < 5 || col > 7)) continue;
      l.lookup[row * l.columns + col] = static_cast<int>(l.cells.size());
      l.cells.push_back({col, row});
    }
  }
  return l;
}

int TagLayout::find(int col, int row) const {
  if (col < 0 || row < 0 || col >= columns || row >= rows) return -1;
  return lookup[row * columns + col];
}

namespace {

constexpr int kDc[4] = {0, 0, 1, -1};  // N, S, E, W
constexpr int kDr[4] = {1, -1, 0, 0};

Index step(const TagLayout& l, Index cell, Index dir) {
  const GridCell c = l.cells[cell];
  const int next = l.find(c.col + kDc[dir], c.row + kDr[dir]);
  return next < 0 ? cell : static_cast<Index>(next);
}

// Opponent distribution after evading an agent standing at `agent`.
SparseRow evade(const TagLayout& l, double p_move, Index agent, Index opp) {
  const GridCell a = l.cells[agent], o = l.cells[opp];
  std::vector<Index> dirs;
  if (o.col >= a.col) dirs.push_back(tag::kEast);
  if (o.col <= a.col) dirs.push_back(tag::kWest);
  if (o.row >= a.row) dirs.push_back(tag::kNorth);
  if (o.row <= a.row) dirs.push_back(tag::kSouth);
  std::map<Index, double> mass;
  mass[opp] += 1.0 - p_move;
  for (Index d : dirs) mass[step(l, opp, d)] += p_move / static_cast<double>(dirs.size());
  SparseRow row;
  for (const auto& [cell, p] : mass) {
    if (p > 0.0) row.push_back({cell, p});
  }
  return row;
}

SparseRow seen_row(Index agent, Index opp, Index tagged) {
  if (opp != tagged && opp == agent) return {{tag::kSeen, 1.0}};
  return {{tag::kNotSeen, 1.0}};
}

}  // namespace

MomdpModel make_tag(const TagConfig& cfg) {
  if (!(cfg.p_move >= 0.0 && cfg.p_move <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "p_move must lie in [0, 1]");
  }
  const TagLayout l = TagLayout::standard();
  const Index C = static_cast<Index>(l.size());
  const Index tagged = C;
  ModelBuilder b(C, C + 1, {"north", "south", "east", "west", "tag"}, {"not-seen", "seen"},
                 cfg.discount);
  b.enable_idle();
  for (Index x = 0; x < C; ++x) {
    for (Index y = 0; y <= C; ++y) {
      for (Index a = 0; a < 5; ++a) b.set_observation(a, x, y, seen_row(x, y, tagged));
      b.set_idle_observation(x, y, seen_row(x, y, tagged));
      if (y == tagged) {
        for (Index a = 0; a < 5; ++a) b.set_transition(a, x, y, {{x, 1.0, {{y, 1.0}}}});
        b.set_idle_transition(x, y, {{x, 1.0, {{y, 1.0}}}});
        b.set_terminal(x, y);
        continue;
      }
      const SparseRow moved = evade(l, cfg.p_move, x, y);
      for (Index a = 0; a < 4; ++a) {
        b.set_transition(a, x, y, {{step(l, x, a), 1.0, moved}});
        b.set_reward(x, y, a, -1.0);
      }
      if (x == y) {
        b.set_transition(tag::kTag, x, y, {{x, 1.0, {{tagged, 1.0}}}});
        b.set_reward(x, y, tag::kTag, 10.0);
      } else {
        b.set_transition(tag::kTag, x, y, {{x, 1.0, moved}});
        b.set_reward(x, y, tag::kTag, -10.0);
      }
      b.set_idle_transition(x, y, {{x, 1.0, moved}});
    }
  }
  std::vector<FlatEntry> init;
  const double p = 1.0 / static_cast<double>(C * (C - 1));
  for (Index x = 0; x < C; ++x) {
    for (Index y = 0; y < C; ++y) {
      if (x != y) init.push_back({x, y, p});
    }
  }
  b.set_initial(std::move(init));
  return std::move(b).build();
}

double check_accuracy(double distance, double d0) {
  return 0.5 + 0.5 * std::pow(2.0, -distance / d0);
}

std::vector<GridCell> rock_positions(const RockSampleConfig& cfg) {
  const int cells = cfg.n * cfg.n;
  const int start = (cfg.n / 2) * cfg.n;  // column 0, row n / 2
  std::vector<int> pool;
  for (int c = 0; c < cells; ++c) {
    if (c != start) pool.push_back(c);
  }
  if (cfg.k < 0 || static_cast<std::size_t>(cfg.k) > pool.size()) {
    throw Error(ErrorCode::InvalidArgument, "too many rocks for the grid");
  }
  Rng rng(derive_seed(cfg.rock_seed, 0x726f636b));
  std::vector<GridCell> out;
  for (int i = 0; i < cfg.k; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
    out.push_back({pool[i] % cfg.n, pool[i] / cfg.n});
  }
  return out;
}

MomdpModel make_rocksample(const RockSampleConfig& cfg) {
  if (cfg.n < 1 || cfg.k < 0 || cfg.k > 16) throw Error(ErrorCode::InvalidArgument, "bad grid or rock count");
  if (!(cfg.d0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "d0 must be > 0");
  if (cfg.sense_cost > 0.0) throw Error(ErrorCode::InvalidCost, "sense cost must be <= 0");
  const int n = cfg.n;
  const Index cells = static_cast<Index>(n * n);
  const Index exit = cells;
  const Index Y = Index{1} << cfg.k;
  const auto rocks = rock_positions(cfg);
  std::vector<int> rock_at(cells, -1);
  for (int i = 0; i < cfg.k; ++i) rock_at[rocks[i].row * n + rocks[i].col] = i;

  std::vector<std::string> actions{"north", "south", "east", "west", "sample"};
  for (int i = 0; i < cfg.k; ++i) actions.push_back("check-" + std::to_string(i));
  const Index A = static_cast<Index>(actions.size());
  ModelBuilder b(cells + 1, Y, std::move(actions), {"none", "good", "bad"}, cfg.discount);
  b.enable_idle();

  for (Index y = 0; y < Y; ++y) {
    for (Index a = 0; a < A; ++a) {
      b.set_transition(a, exit, y, {{exit, 1.0, {{y, 1.0}}}});
      b.set_observation(a, exit, y, {{rocksample::kNone, 1.0}});
    }
    b.set_terminal(exit, y);
    b.set_idle_transition(exit, y, {{exit, 1.0, {{y, 1.0}}}});
    b.set_idle_observation(exit, y, {{rocksample::kNone, 1.0}});
  }
  for (Index x = 0; x < cells; ++x) {
    const int col = static_cast<int>(x) % n, row = static_cast<int>(x) / n;
    for (Index y = 0; y < Y; ++y) {
      const SparseRow stay{{y, 1.0}};
      const auto move = [&](int dc, int dr) -> Index {
        const int c = col + dc, r = row + dr;
        if (c >= n) return exit;
        if (c < 0 || r < 0 || r >= n) return x;
        return static_cast<Index>(r * n + c);
      };
      b.set_transition(rocksample::kNorth, x, y, {{move(0, 1), 1.0, stay}});
      b.set_transition(rocksample::kSouth, x, y, {{move(0, -1), 1.0, stay}});
      b.set_transition(rocksample::kEast, x, y, {{move(1, 0), 1.0, stay}});
      b.set_transition(rocksample::kWest, x, y, {{move(-1, 0), 1.0, stay}});
      if (col == n - 1) b.set_reward(x, y, rocksample::kEast, 10.0);
      const int r = rock_at[x];
      if (r >= 0) {
        const bool good = (y >> r) & 1U;
        b.set_transition(rocksample::kSample, x, y, {{x, 1.0, {{y & ~(Index{1} << r), 1.0}}}});
        b.set_reward(x, y, rocksample::kSample, good ? 10.0 : -10.0);
      } else {
        b.set_transition(rocksample::kSample, x, y, {{x, 1.0, stay}});
      }
      for (Index a = 0; a < rocksample::kFirstCheck; ++a) {
        b.set_observation(a, x, y, {{rocksample::kNone, 1.0}});
      }
      for (int i = 0; i < cfg.k; ++i) {
        const Index a = rocksample::kFirstCheck + static_cast<Index>(i);
        const double d = std::hypot(rocks[i].col - col, rocks[i].row - row);
        const double acc = check_accuracy(d, cfg.d0);
        const bool good = (y >> i) & 1U;
        b.set_transition(a, x, y, {{x, 1.0, stay}});
        b.set_reward(x, y, a, cfg.sense_cost);
        SparseRow obs;
        const double p_good = good ? acc : 1.0 - acc;
        if (p_good > 0.0) obs.push_back({rocksample::kGood, p_good});
        if (p_good < 1.0) obs.push_back({rocksample::kBad, 1.0 - p_good});
        b.set_observation(a, x, y, std::move(obs));
      }
      b.set_idle_transition(x, y, {{x, 1.0, stay}});
      b.set_idle_observation(x, y, {{rocksample::kNone, 1.0}});
    }
  }
  const Index start = static_cast<Index>((n / 2) * n);
  std::vector<FlatEntry> init;
  for (Index y = 0; y < Y; ++y) init.push_back({start, y, 1.0 / static_cast<double>(Y)});
  b.set_initial(std::move(init));
  return std::move(b).build();
}

std::string Domain::name() const {
  if (kind == DomainKind::Tag) return "tag";
  return "rocksample(" + std::to_string(rs.n) + "," + std::to_string(rs.k) + ")";
}

Domain make_domain(const TagConfig& cfg) {
  Domain d;
  d.kind = DomainKind::Tag;
  d.tag = cfg;
  d.layout = TagLayout::standard();
  d.model = make_tag(cfg);
  return d;
}

Domain make_domain(const RockSampleConfig& cfg) {
  Domain d;
  d.kind = DomainKind::RockSample;
  d.rs = cfg;
  d.rocks = rock_positions(cfg);
  d.model = make_rocksample(cfg);
  return d;
}

StateSample reset_trial(const Domain& domain, Rng& rng) {
  if (domain.kind == DomainKind::Tag) {
    const std::uint64_t C = domain.layout.size();
    const Index agent = static_cast<Index>(rng.below(C));
    Index opp = static_cast<Index>(rng.below(C - 1));
    if (opp >= agent) ++opp;
    return {agent, opp};
  }
  Index y = 0;
  for (int i = 0; i < domain.rs.k; ++i) {
    if (rng.bernoulli(0.5)) y |= Index{1} << i;
  }
  return {static_cast<Index>((domain.rs.n / 2) * domain.rs.n), y};
}

Suggestion tag_heuristic(const Domain& domain, Index x, Index y) {
  if (y >= domain.layout.size()) return Suggestion::absent();
  WallSensor sensor;
  sensor.columns = domain.layout.columns;
  sensor.rows = domain.layout.rows;
  return heuristic_suggest(sensor, domain.layout.cells[x], domain.layout.cells[y]);
}

}  // namespace advisor
