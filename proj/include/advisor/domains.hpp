#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advisor/momdp.hpp"
#include "advisor/random.hpp"
#include "advisor/suggesters.hpp"

namespace advisor {

struct TagConfig {
  double p_move = 0.8;
  double discount = 0.95;
};

/// 10 x 2 lower corridor with a 3 x 3 block above columns 5..7: 29 cells.
/// Row 0 is the southern edge.
struct TagLayout {
  int columns = 10;
  int rows = 5;
  std::vector<GridCell> cells;
  std::vector<int> lookup;  // [row * columns + col] -> cell index or -1

  static TagLayout standard();
  int find(int col, int row) const;
  std::size_t size() const { return cells.size(); }
};

namespace tag {
inline constexpr Index kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kTag = 4;
inline constexpr Index kNotSeen = 0, kSeen = 1;
}  // namespace tag

/// Visible: agent cell. Hidden: opponent cell, plus a final "tagged" state
/// that is terminal. Idle dynamics: the agent holds while the opponent moves.
MomdpModel make_tag(const TagConfig& cfg);

struct RockSampleConfig {
  int n = 4;
  int k = 4;
  double d0 = 10.0;
  double sense_cost = -1.0;
  std::uint64_t rock_seed = 7;
  double discount = 0.95;
};

namespace rocksample {
inline constexpr Index kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kSample = 4, kFirstCheck = 5;
inline constexpr Index kNone = 0, kGood = 1, kBad = 2;
}  // namespace rocksample

/// 0.5 + 0.5 * 2^(-d / d0).
double check_accuracy(double distance, double d0);

/// Rock cells drawn without replacement from the grid minus the start cell.
std::vector<GridCell> rock_positions(const RockSampleConfig& cfg);

/// Visible: agent cell (row * n + col) plus a terminal exit state at index
/// n * n. Hidden: rock qualities, bit i set when rock i is good.
MomdpModel make_rocksample(const RockSampleConfig& cfg);

enum class DomainKind { Tag, RockSample };

struct Domain {
  DomainKind kind = DomainKind::Tag;
  MomdpModel model;
  TagConfig tag;
  TagLayout layout;
  RockSampleConfig rs;
  std::vector<GridCell> rocks;

  std::string name() const;
  std::size_t default_max_steps() const { return kind == DomainKind::Tag ? 200 : 100; }
};

Domain make_domain(const TagConfig& cfg);
Domain make_domain(const RockSampleConfig& cfg);

/// Fresh start state: Tag places agent and opponent on distinct uniform
/// cells; RockSample puts the agent at the start with i.i.d. fair rocks.
StateSample reset_trial(const Domain& domain, Rng& rng);

/// Wall-band heuristic evaluated at a base Tag state. Absent once tagged.
Suggestion tag_heuristic(const Domain& domain, Index x, Index y);

}  // namespace advisor
