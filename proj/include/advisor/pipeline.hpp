#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "advisor/augment.hpp"
#include "advisor/momdp.hpp"
#include "advisor/policy.hpp"
#include "advisor/solver.hpp"
#include "advisor/suggesters.hpp"

namespace advisor {

struct StageSettings {
  double precision = 0.01;
  double time = 300.0;
  std::uint64_t seed = 0;
};

struct BaseStage {
  AlphaPolicy policy;
  QTable q;
  bool loaded = false;  // restored from disk rather than solved
};

/// Stage 1: solve the base model and extract Q. With a directory, writes
/// base.model.json, base.policy.json, base.q.json and reuses them when the
/// model and settings match a previous run.
BaseStage solve_base(const MomdpModel& base, const StageSettings& settings,
                     const std::filesystem::path& dir = {});

struct AugmentSpec {
  SuggesterSpec spec;
  bool per_step = true;
  bool ask = false;
  double c_ask = -1.0;
  std::optional<std::size_t> n_ask;

  /// Directory name for the stage-2 artifacts of this variant.
  std::string variant() const;
};

struct PipelineResult {
  BaseStage base;
  TypedModel typed;
  std::optional<AskModel> ask;
  AlphaPolicy policy;
  bool loaded = false;
  std::filesystem::path stage2_dir;

  const MomdpModel& model() const { return ask ? ask->model : typed.model; }
};

/// Two-stage bootstrap. Stage 2 builds the typed (and optionally ask) model
/// from the stage-1 Q table and solves it. Stage-2 artifacts go under
/// dir/<variant>/ as typed.* or ask.* files.
PipelineResult bootstrap_pipeline(const MomdpModel& base, const AugmentSpec& augment,
                                  const StageSettings& base_settings,
                                  const StageSettings& settings,
                                  const std::filesystem::path& dir = {});
PipelineResult bootstrap_pipeline(const MomdpModel& base, const BaseStage& stage1,
                                  const AugmentSpec& augment, const StageSettings& settings,
                                  const std::filesystem::path& dir = {});

/// FNV-1a over a string; used to tag cached artifacts.
std::uint64_t fingerprint(const std::string& text);

}  // namespace advisor
