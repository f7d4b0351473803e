#include "advisor/pipeline.hpp"

#include <cstdio>
#include <sstream>

#include "advisor/error.hpp"
#include "advisor/io.hpp"

namespace advisor {

namespace fs = std::filesystem;

std::uint64_t fingerprint(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json stage_manifest(const std::string& model_text, const StageSettings& s, const Json& extra) {
  Json m = {{"model", hex(fingerprint(model_text))},
            {"precision", s.precision},
            {"time", s.time},
            {"seed", s.seed}};
  if (!extra.is_null()) m["augment"] = extra;
  return m;
}

bool manifest_matches(const fs::path& path, const Json& expected) {
  if (!fs::exists(path)) return false;
  try {
    return read_json(path) == expected;
  } catch (const Error&) {
    return false;
  }
}

SolveParams params_of(const StageSettings& s) {
  SolveParams p;
  p.target_precision = s.precision;
  p.time_budget = s.time;
  p.rng_seed = s.seed;
  return p;
}

Json augment_json(const AugmentSpec& a, std::uint64_t base_key) {
  Json j = {{"types", a.spec.types},
            {"t_p", a.spec.t_p},
            {"prior", a.spec.prior},
            {"per_step", a.per_step},
            {"ask", a.ask},
            {"base", hex(base_key)}};
  if (a.ask) {
    j["c_ask"] = a.c_ask;
    j["n_ask"] = a.n_ask ? Json(*a.n_ask) : Json(nullptr);
  }
  return j;
}

}  // namespace

BaseStage solve_base(const MomdpModel& base, const StageSettings& settings, const fs::path& dir) {
  BaseStage out;
  if (dir.empty()) {
    out.policy = solve(base, params_of(settings));
    out.q = extract_q(base, out.policy);
    return out;
  }
  const std::string text = model_to_json(base).dump();
  const Json manifest = stage_manifest(text, settings, nullptr);
  const fs::path mpath = dir / "base.manifest.json";
  if (manifest_matches(mpath, manifest) && fs::exists(dir / "base.policy.json") &&
      fs::exists(dir / "base.q.json")) {
    out.policy = policy_from_json(read_json(dir / "base.policy.json"));
    out.q = qtable_from_json(read_json(dir / "base.q.json"));
    out.loaded = true;
    return out;
  }
  out.policy = solve(base, params_of(settings));
  out.q = extract_q(base, out.policy);
  write_text(dir / "base.model.json", text);
  write_json(dir / "base.policy.json", policy_to_json(out.policy));
  write_json(dir / "base.q.json", qtable_to_json(out.q));
  write_json(mpath, manifest);
  return out;
}

std::string AugmentSpec::variant() const {
  std::ostringstream name;
  name << (ask ? "ask" : "typed");
  for (double t : spec.types) name << '-' << t;
  name << "-tp" << spec.t_p;
  if (!per_step && !ask) name << "-silent";
  if (ask) {
    name << "-c" << c_ask << "-n";
    if (n_ask) name << *n_ask;
    else name << "inf";
  }
  const std::string base = name.str();
  std::string prior;
  for (double p : spec.prior) prior += std::to_string(p) + ",";
  return base + "-" + hex(fingerprint(prior)).substr(0, 8);
}

PipelineResult bootstrap_pipeline(const MomdpModel& base, const BaseStage& stage1,
                                  const AugmentSpec& augment, const StageSettings& settings,
                                  const fs::path& dir) {
  PipelineResult r;
  r.base = stage1;
  r.typed = augment_types(base, augment.spec, stage1.q, augment.per_step && !augment.ask);
  if (augment.ask) r.ask = augment_ask(r.typed, augment.c_ask, augment.n_ask);
  const MomdpModel& model = r.model();
  const std::string prefix = augment.ask ? "ask" : "typed";
  if (dir.empty()) {
    r.policy = solve(model, params_of(settings));
    return r;
  }
  r.stage2_dir = dir / augment.variant();
  const std::string base_text = qtable_to_json(stage1.q).dump();
  const Json manifest = stage_manifest(base_text, settings, augment_json(augment, fingerprint(base_text)));
  const fs::path mpath = r.stage2_dir / (prefix + ".manifest.json");
  const fs::path ppath = r.stage2_dir / (prefix + ".policy.json");
  if (manifest_matches(mpath, manifest) && fs::exists(ppath)) {
    r.policy = policy_from_json(read_json(ppath));
    r.loaded = true;
    return r;
  }
  r.policy = solve(model, params_of(settings));
  write_json(r.stage2_dir / (prefix + ".model.json"), model_to_json(model));
  write_json(ppath, policy_to_json(r.policy));
  write_json(mpath, manifest);
  return r;
}

PipelineResult bootstrap_pipeline(const MomdpModel& base, const AugmentSpec& augment,
                                  const StageSettings& base_settings,
                                  const StageSettings& settings, const fs::path& dir) {
  return bootstrap_pipeline(base, solve_base(base, base_settings, dir), augment, settings, dir);
}

}  // namespace advisor
