#include "advisor/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "advisor/error.hpp"

namespace advisor {

namespace {

Json sparse_row(std::span<const Entry> row) {
  Json out = Json::array();
  for (const Entry& e : row) out.push_back({e.index, e.prob});
  return out;
}

SparseRow parse_row(const Json& j, std::size_t width, const std::string& where) {
  SparseRow row;
  if (!j.is_array()) throw Error(ErrorCode::InvalidModel, where + ": expected an array");
  const bool sparse = !j.empty() && j.front().is_array();
  if (sparse) {
    for (const Json& e : j) {
      if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::InvalidModel, where + ": bad sparse entry");
      const auto idx = e[0].get<std::size_t>();
      if (idx >= width) throw Error(ErrorCode::InvalidModel, where + ": index out of range");
      row.push_back({static_cast<Index>(idx), e[1].get<double>()});
    }
    return row;
  }
  if (j.size() != width) throw Error(ErrorCode::InvalidModel, where + ": dense row has wrong length");
  for (std::size_t i = 0; i < width; ++i) {
    const double p = j[i].get<double>();
    if (p != 0.0) row.push_back({static_cast<Index>(i), p});
  }
  return row;
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::InvalidModel, std::string("missing field ") + name);
  }
  return j.at(name);
}

const Json& at3(const Json& j, std::size_t a, std::size_t b, std::size_t c, const char* name) {
  if (!j.is_array() || a >= j.size() || !j[a].is_array() || b >= j[a].size() ||
      !j[a][b].is_array() || c >= j[a][b].size()) {
    throw Error(ErrorCode::InvalidModel, std::string(name) + ": table has wrong shape");
  }
  return j[a][b][c];
}

const Json& at2(const Json& j, std::size_t a, std::size_t b, const char* name) {
  if (!j.is_array() || a >= j.size() || !j[a].is_array() || b >= j[a].size()) {
    throw Error(ErrorCode::InvalidModel, std::string(name) + ": table has wrong shape");
  }
  return j[a][b];
}

// Splits stored branches back into the t_x / t_y layout.
void put_transition(std::span<const Branch> branches, const auto& hidden, Json& tx, Json& ty) {
  tx = Json::array();
  ty = Json::array();
  for (const Branch& b : branches) {
    tx.push_back({b.x_next, b.prob});
    ty.push_back({b.x_next, sparse_row(hidden(b))});
  }
}

std::vector<BranchSpec> get_transition(const Json& tx, const Json& ty, std::size_t X,
                                       std::size_t Y, const std::string& where) {
  const SparseRow xs = parse_row(tx, X, where + " t_x");
  if (!ty.is_array()) throw Error(ErrorCode::InvalidModel, where + " t_y: expected an array");
  std::vector<BranchSpec> out;
  for (const Entry& e : xs) {
    const Json* row = nullptr;
    for (const Json& item : ty) {
      if (item.is_array() && item.size() == 2 && item[0].get<std::size_t>() == e.index) row = &item[1];
    }
    if (row == nullptr) throw Error(ErrorCode::InvalidModel, where + " t_y: no row for successor");
    out.push_back({e.index, e.prob, parse_row(*row, Y, where + " t_y")});
  }
  return out;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void only_fields(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, (path.empty() ? "<root>" : path) + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) throw Error(ErrorCode::ConfigError, join(path, it.key()) + ": unknown field");
  }
}

template <typename T>
T get_field(const Json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::ConfigError, join(path, key) + ": wrong type");
  }
}

std::string agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::Normal: return "normal";
    case AgentKind::Perfect: return "perfect";
    case AgentKind::Naive: return "naive";
    case AgentKind::NoisyFixed: return "noisy";
    case AgentKind::MultiType: return "multitype";
  }
  return "normal";
}

std::string suggester_name(SuggesterKind k) {
  switch (k) {
    case SuggesterKind::None: return "none";
    case SuggesterKind::NoisyRational: return "noisy_rational";
    case SuggesterKind::Heuristic: return "heuristic";
    case SuggesterKind::Interactive: return "interactive";
  }
  return "none";
}

}  // namespace

Json model_to_json(const MomdpModel& m) {
  const std::size_t X = m.x_count(), Y = m.y_count(), A = m.action_count();
  Json j;
  j["x_count"] = X;
  j["y_count"] = Y;
  j["actions"] = m.actions();
  j["observations"] = m.observations();
  j["discount"] = m.discount();
  Json tx = Json::array(), ty = Json::array(), obs = Json::array(), reward = Json::array();
  for (Index a = 0; a < A; ++a) {
    Json txa = Json::array(), tya = Json::array(), oa = Json::array();
    for (Index x = 0; x < X; ++x) {
      Json txx = Json::array(), tyx = Json::array(), ox = Json::array();
      for (Index y = 0; y < Y; ++y) {
        Json rx, ry;
        put_transition(m.branches(a, x, y), [&](const Branch& b) { return m.hidden(b); }, rx, ry);
        txx.push_back(std::move(rx));
        tyx.push_back(std::move(ry));
        ox.push_back(sparse_row(m.observation_row(a, x, y)));
      }
      txa.push_back(std::move(txx));
      tya.push_back(std::move(tyx));
      oa.push_back(std::move(ox));
    }
    tx.push_back(std::move(txa));
    ty.push_back(std::move(tya));
    obs.push_back(std::move(oa));
  }
  for (Index x = 0; x < X; ++x) {
    Json rx = Json::array();
    for (Index y = 0; y < Y; ++y) {
      Json ry = Json::array();
      for (Index a = 0; a < A; ++a) ry.push_back(m.reward(x, y, a));
      rx.push_back(std::move(ry));
    }
    reward.push_back(std::move(rx));
  }
  j["t_x"] = std::move(tx);
  j["t_y"] = std::move(ty);
  j["obs"] = std::move(obs);
  j["reward"] = std::move(reward);
  Json init = Json::array();
  for (const FlatEntry& e : m.initial()) init.push_back({e.x, e.y, e.prob});
  j["initial"] = std::move(init);
  Json term = Json::array(), infeasible = Json::array();
  for (Index x = 0; x < X; ++x) {
    for (Index y = 0; y < Y; ++y) {
      if (m.terminal(x, y)) term.push_back({x, y});
    }
    for (Index a = 0; a < A; ++a) {
      if (!m.feasible(x, a)) infeasible.push_back({x, a});
    }
  }
  j["terminal"] = std::move(term);
  if (!infeasible.empty()) j["infeasible"] = std::move(infeasible);
  if (const IdleDynamics* idle = m.idle()) {
    Json itx = Json::array(), ity = Json::array(), io = Json::array();
    for (Index x = 0; x < X; ++x) {
      Json txx = Json::array(), tyx = Json::array(), ox = Json::array();
      for (Index y = 0; y < Y; ++y) {
        Json rx, ry;
        put_transition(idle->transitions.branches(0, x, y),
                       [&](const Branch& b) { return idle->transitions.hidden(b); }, rx, ry);
        txx.push_back(std::move(rx));
        tyx.push_back(std::move(ry));
        ox.push_back(sparse_row(idle->observations.row(0, x, y)));
      }
      itx.push_back(std::move(txx));
      ity.push_back(std::move(tyx));
      io.push_back(std::move(ox));
    }
    j["idle"] = {{"t_x", std::move(itx)}, {"t_y", std::move(ity)}, {"obs", std::move(io)}};
  }
  return j;
}

MomdpModel model_from_json(const Json& j) {
  try {
    const auto X = field(j, "x_count").get<std::size_t>();
    const auto Y = field(j, "y_count").get<std::size_t>();
    const auto actions = field(j, "actions").get<std::vector<std::string>>();
    const auto observations = field(j, "observations").get<std::vector<std::string>>();
    const double discount = field(j, "discount").get<double>();
    const std::size_t A = actions.size(), O = observations.size();
    ModelBuilder b(X, Y, actions, observations, discount);
    const Json& tx = field(j, "t_x");
    const Json& ty = field(j, "t_y");
    const Json& obs = field(j, "obs");
    const Json& reward = field(j, "reward");
    for (Index a = 0; a < A; ++a) {
      for (Index x = 0; x < X; ++x) {
        for (Index y = 0; y < Y; ++y) {
          const std::string where = "[" + std::to_string(a) + "][" + std::to_string(x) + "][" +
                                    std::to_string(y) + "]";
          b.set_transition(a, x, y, get_transition(at3(tx, a, x, y, "t_x"), at3(ty, a, x, y, "t_y"), X, Y, where));
          b.set_observation(a, x, y, parse_row(at3(obs, a, x, y, "obs"), O, "obs" + where));
        }
      }
    }
    for (Index x = 0; x < X; ++x) {
      for (Index y = 0; y < Y; ++y) {
        for (Index a = 0; a < A; ++a) b.set_reward(x, y, a, at3(reward, x, y, a, "reward").get<double>());
      }
    }
    std::vector<FlatEntry> init;
    for (const Json& e : field(j, "initial")) {
      const auto x = e.at(0).get<Index>(), y = e.at(1).get<Index>();
      if (x >= X || y >= Y) throw Error(ErrorCode::InvalidModel, "initial: state out of range");
      init.push_back({x, y, e.at(2).get<double>()});
    }
    b.set_initial(std::move(init));
    for (const Json& e : field(j, "terminal")) {
      const auto x = e.at(0).get<Index>(), y = e.at(1).get<Index>();
      if (x >= X || y >= Y) throw Error(ErrorCode::InvalidModel, "terminal: state out of range");
      b.set_terminal(x, y);
    }
    if (j.contains("infeasible")) {
      for (const Json& e : j.at("infeasible")) {
        const auto x = e.at(0).get<Index>(), a = e.at(1).get<Index>();
        if (x >= X || a >= A) throw Error(ErrorCode::InvalidModel, "infeasible: pair out of range");
        b.set_infeasible(x, a);
      }
    }
    if (j.contains("idle")) {
      const Json& idle = j.at("idle");
      b.enable_idle();
      for (Index x = 0; x < X; ++x) {
        for (Index y = 0; y < Y; ++y) {
          const std::string where = "idle[" + std::to_string(x) + "][" + std::to_string(y) + "]";
          b.set_idle_transition(x, y, get_transition(at2(field(idle, "t_x"), x, y, "idle.t_x"),
                                                     at2(field(idle, "t_y"), x, y, "idle.t_y"), X, Y, where));
          b.set_idle_observation(x, y, parse_row(at2(field(idle, "obs"), x, y, "idle.obs"), O, where));
        }
      }
    }
    return std::move(b).build();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidModel, std::string("malformed model: ") + e.what());
  }
}

Json policy_to_json(const AlphaPolicy& p) {
  Json j;
  j["y_count"] = p.y_count;
  j["stats"] = {{"lower_bound", p.stats.lower_bound}, {"upper_bound", p.stats.upper_bound},
                {"precision", p.stats.precision},     {"iterations", p.stats.iterations},
                {"backups", p.stats.backups},         {"wall_time", p.stats.wall_time},
                {"converged", p.stats.converged}};
  Json sets = Json::array();
  for (const AlphaSet& s : p.sets) {
    Json vs = Json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto v = s.vector(i);
      vs.push_back({{"action", s.actions[i]}, {"alpha", std::vector<double>(v.begin(), v.end())}});
    }
    sets.push_back(std::move(vs));
  }
  j["sets"] = std::move(sets);
  return j;
}

AlphaPolicy policy_from_json(const Json& j) {
  try {
    AlphaPolicy p;
    p.y_count = j.at("y_count").get<std::size_t>();
    if (j.contains("stats")) {
      const Json& s = j.at("stats");
      p.stats.lower_bound = s.value("lower_bound", 0.0);
      p.stats.upper_bound = s.value("upper_bound", 0.0);
      p.stats.precision = s.value("precision", 0.0);
      p.stats.iterations = s.value("iterations", std::size_t{0});
      p.stats.backups = s.value("backups", std::size_t{0});
      p.stats.wall_time = s.value("wall_time", 0.0);
      p.stats.converged = s.value("converged", false);
    }
    for (const Json& vs : j.at("sets")) {
      AlphaSet set;
      set.dim = p.y_count;
      for (const Json& v : vs) {
        const auto alpha = v.at("alpha").get<std::vector<double>>();
        if (alpha.size() != p.y_count) throw Error(ErrorCode::DimensionMismatch, "alpha vector has wrong length");
        set.add(alpha, v.at("action").get<Index>());
      }
      p.sets.push_back(std::move(set));
    }
    return p;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::DecodeError, std::string("malformed policy: ") + e.what());
  }
}

Json qtable_to_json(const QTable& q) {
  return {{"x_count", q.x_count}, {"y_count", q.y_count}, {"action_count", q.action_count},
          {"values", q.values}};
}

QTable qtable_from_json(const Json& j) {
  try {
    QTable q;
    q.x_count = j.at("x_count").get<std::size_t>();
    q.y_count = j.at("y_count").get<std::size_t>();
    q.action_count = j.at("action_count").get<std::size_t>();
    q.values = j.at("values").get<std::vector<double>>();
    if (q.values.size() != q.state_count() * q.action_count) {
      throw Error(ErrorCode::DimensionMismatch, "Q values do not match the header");
    }
    return q;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::DecodeError, std::string("malformed Q table: ") + e.what());
  }
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  only_fields(j, "", {"domain", "agent", "suggester", "mode", "ask", "n_simulations",
                      "trials_per_simulation", "max_steps_per_trial", "seed", "solve", "artifacts",
                      "output"});
  if (!j.contains("domain")) throw Error(ErrorCode::ConfigError, "domain: missing");
  const Json& d = j.at("domain");
  const std::string dk = get_field<std::string>(d, "domain", "domain", "");
  if (dk == "tag") {
    only_fields(d, "domain", {"domain", "p_move", "discount"});
    c.domain.kind = DomainKind::Tag;
    c.domain.tag.p_move = get_field(d, "domain", "p_move", c.domain.tag.p_move);
    c.domain.tag.discount = get_field(d, "domain", "discount", c.domain.tag.discount);
  } else if (dk == "rocksample") {
    only_fields(d, "domain", {"domain", "n", "k", "d0", "sense_cost", "rock_seed", "discount"});
    auto& r = c.domain.rocksample;
    c.domain.kind = DomainKind::RockSample;
    r.n = get_field(d, "domain", "n", r.n);
    r.k = get_field(d, "domain", "k", r.k);
    r.d0 = get_field(d, "domain", "d0", r.d0);
    r.sense_cost = get_field(d, "domain", "sense_cost", r.sense_cost);
    r.rock_seed = get_field(d, "domain", "rock_seed", r.rock_seed);
    r.discount = get_field(d, "domain", "discount", r.discount);
  } else {
    throw Error(ErrorCode::ConfigError, "domain.domain: expected \"tag\" or \"rocksample\"");
  }

  if (j.contains("agent")) {
    const Json& a = j.at("agent");
    only_fields(a, "agent", {"kind", "nu", "lambda", "types", "t_p", "prior"});
    const std::string k = get_field<std::string>(a, "agent", "kind", "normal");
    if (k == "normal") c.agent.kind = AgentKind::Normal;
    else if (k == "perfect") c.agent.kind = AgentKind::Perfect;
    else if (k == "naive") c.agent.kind = AgentKind::Naive;
    else if (k == "noisy") c.agent.kind = AgentKind::NoisyFixed;
    else if (k == "multitype") c.agent.kind = AgentKind::MultiType;
    else throw Error(ErrorCode::ConfigError, "agent.kind: unknown agent \"" + k + "\"");
    c.agent.nu = get_field(a, "agent", "nu", 0.0);
    c.agent.lambda = get_field(a, "agent", "lambda", 0.0);
    SuggesterSpec std_spec = SuggesterSpec::standard(get_field(a, "agent", "t_p", 0.0));
    c.agent.types.types = get_field(a, "agent", "types", std_spec.types);
    c.agent.types.t_p = std_spec.t_p;
    c.agent.types.prior = get_field(a, "agent", "prior", std::vector<double>{});
    if (c.agent.types.prior.empty()) {
      c.agent.types.prior = c.agent.types.types == std_spec.types
                                ? std_spec.prior
                                : std::vector<double>(c.agent.types.types.size(),
                                                      1.0 / static_cast<double>(c.agent.types.types.size()));
    }
  }

  if (j.contains("suggester")) {
    const Json& s = j.at("suggester");
    only_fields(s, "suggester", {"kind", "lambda", "schedule"});
    const std::string k = get_field<std::string>(s, "suggester", "kind", "noisy_rational");
    if (k == "none") c.suggester = SuggesterKind::None;
    else if (k == "noisy_rational") c.suggester = SuggesterKind::NoisyRational;
    else if (k == "heuristic") c.suggester = SuggesterKind::Heuristic;
    else if (k == "interactive") c.suggester = SuggesterKind::Interactive;
    else throw Error(ErrorCode::ConfigError, "suggester.kind: unknown suggester \"" + k + "\"");
    if (s.contains("schedule")) {
      c.schedule.segments.clear();
      const Json& sch = s.at("schedule");
      if (!sch.is_array()) throw Error(ErrorCode::ConfigError, "suggester.schedule: expected an array");
      for (std::size_t i = 0; i < sch.size(); ++i) {
        const std::string path = "suggester.schedule[" + std::to_string(i) + "]";
        if (!sch[i].is_array() || sch[i].size() != 2 || !sch[i][0].is_number_unsigned() || !sch[i][1].is_number()) {
          throw Error(ErrorCode::ConfigError, path + ": expected [trial, lambda]");
        }
        c.schedule.segments.push_back({sch[i][0].get<std::size_t>(), sch[i][1].get<double>()});
      }
    } else {
      c.schedule = LambdaSchedule::constant(get_field(s, "suggester", "lambda", 1.0));
    }
  }

  const std::string mode = get_field<std::string>(j, "", "mode", "per_step");
  if (mode == "per_step") c.mode = SuggestionMode::PerStep;
  else if (mode == "ask") c.mode = SuggestionMode::Ask;
  else throw Error(ErrorCode::ConfigError, "mode: expected \"per_step\" or \"ask\"");

  if (j.contains("ask")) {
    const Json& a = j.at("ask");
    only_fields(a, "ask", {"cost", "limit", "scope"});
    c.ask.cost = get_field(a, "ask", "cost", c.ask.cost);
    if (a.contains("limit") && !a.at("limit").is_null()) {
      if (!a.at("limit").is_number_unsigned()) throw Error(ErrorCode::ConfigError, "ask.limit: expected a count or null");
      c.ask.limit = a.at("limit").get<std::size_t>();
    }
    const std::string scope = get_field<std::string>(a, "ask", "scope", "trial");
    if (scope != "trial" && scope != "simulation") {
      throw Error(ErrorCode::ConfigError, "ask.scope: expected \"trial\" or \"simulation\"");
    }
    c.ask.per_trial = scope == "trial";
  }
  c.n_simulations = get_field(j, "", "n_simulations", c.n_simulations);
  c.trials_per_simulation = get_field(j, "", "trials_per_simulation", c.trials_per_simulation);
  c.max_steps_per_trial = get_field(j, "", "max_steps_per_trial", c.max_steps_per_trial);
  c.seed = get_field(j, "", "seed", c.seed);
  if (j.contains("solve")) {
    const Json& s = j.at("solve");
    only_fields(s, "solve", {"base_precision", "base_time", "precision", "time", "seed"});
    c.solve.base_precision = get_field(s, "solve", "base_precision", c.solve.base_precision);
    c.solve.base_time = get_field(s, "solve", "base_time", c.solve.base_time);
    c.solve.precision = get_field(s, "solve", "precision", c.solve.precision);
    c.solve.time = get_field(s, "solve", "time", c.solve.time);
    c.solve.seed = get_field(s, "solve", "seed", c.solve.seed);
  }
  c.artifacts = get_field<std::string>(j, "", "artifacts", "");
  c.output = get_field<std::string>(j, "", "output", "");
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.detail());
  }
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  if (c.domain.kind == DomainKind::Tag) {
    j["domain"] = {{"domain", "tag"}, {"p_move", c.domain.tag.p_move}, {"discount", c.domain.tag.discount}};
  } else {
    const auto& r = c.domain.rocksample;
    j["domain"] = {{"domain", "rocksample"}, {"n", r.n}, {"k", r.k}, {"d0", r.d0},
                   {"sense_cost", r.sense_cost}, {"rock_seed", r.rock_seed}, {"discount", r.discount}};
  }
  Json a = {{"kind", agent_kind_name(c.agent.kind)}};
  if (c.agent.kind == AgentKind::Naive) a["nu"] = c.agent.nu;
  if (c.agent.kind == AgentKind::NoisyFixed) a["lambda"] = c.agent.lambda;
  if (c.agent.kind == AgentKind::MultiType) {
    a["types"] = c.agent.types.types;
    a["t_p"] = c.agent.types.t_p;
    a["prior"] = c.agent.types.prior;
  }
  j["agent"] = std::move(a);
  Json sch = Json::array();
  for (const auto& [t, l] : c.schedule.segments) sch.push_back({t, l});
  j["suggester"] = {{"kind", suggester_name(c.suggester)}, {"schedule", std::move(sch)}};
  j["mode"] = c.mode == SuggestionMode::PerStep ? "per_step" : "ask";
  j["ask"] = {{"cost", c.ask.cost},
              {"limit", c.ask.limit ? Json(*c.ask.limit) : Json(nullptr)},
              {"scope", c.ask.per_trial ? "trial" : "simulation"}};
  j["n_simulations"] = c.n_simulations;
  j["trials_per_simulation"] = c.trials_per_simulation;
  j["max_steps_per_trial"] = c.max_steps_per_trial;
  j["seed"] = c.seed;
  j["solve"] = {{"base_precision", c.solve.base_precision}, {"base_time", c.solve.base_time},
                {"precision", c.solve.precision}, {"time", c.solve.time}, {"seed", c.solve.seed}};
  j["artifacts"] = c.artifacts;
  j["output"] = c.output;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::IoError, "config file not found: " + path.string());
  }
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.detail());
  }
}

Json record_to_json(const TrialRecord& r) {
  Json j;
  j["simulation"] = r.simulation;
  j["trial"] = r.trial;
  j["discounted_reward"] = r.discounted_reward;
  j["undiscounted_reward"] = r.undiscounted_reward;
  j["steps"] = r.steps;
  j["asks"] = r.asks;
  j["expected_type"] = r.expected_type ? Json(*r.expected_type) : Json(nullptr);
  j["lambda_star"] = r.lambda_star;
  j["seed"] = r.seed;
  j["truncated"] = r.truncated;
  j["ask_budget_end"] = r.ask_budget_end;
  return j;
}

TrialRecord record_from_json(const Json& j) {
  try {
    TrialRecord r;
    r.simulation = j.at("simulation").get<std::size_t>();
    r.trial = j.at("trial").get<std::size_t>();
    r.discounted_reward = j.at("discounted_reward").get<double>();
    r.undiscounted_reward = j.at("undiscounted_reward").get<double>();
    r.steps = j.at("steps").get<std::size_t>();
    r.asks = j.at("asks").get<std::size_t>();
    if (!j.at("expected_type").is_null()) r.expected_type = j.at("expected_type").get<double>();
    r.lambda_star = j.at("lambda_star").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.truncated = j.at("truncated").get<bool>();
    r.ask_budget_end = j.value("ask_budget_end", std::size_t{0});
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::DecodeError, std::string("malformed record: ") + e.what());
  }
}

std::string records_to_jsonl(const std::vector<TrialRecord>& records) {
  std::string out;
  for (const TrialRecord& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<TrialRecord> records_from_jsonl(const std::string& text) {
  std::vector<TrialRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(Json::parse(line)));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::DecodeError, "line " + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::DecodeError, "line " + std::to_string(number) + ": " + e.detail());
    }
  }
  return out;
}

std::string summary_to_csv(const std::vector<MetricSummary>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "metric,trial_index,mean,ci95_half_width,n\n";
  for (const MetricSummary& r : rows) {
    out << r.metric << ',';
    if (r.trial_index) out << *r.trial_index;
    else out << "all";
    out << ',' << r.mean << ',' << r.ci95_half_width << ',' << r.n << '\n';
  }
  return out.str();
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump()); }

}  // namespace advisor
