#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "advisor/harness.hpp"
#include "advisor/momdp.hpp"
#include "advisor/policy.hpp"
#include "advisor/solver.hpp"

namespace advisor {

using Json = nlohmann::json;

Json model_to_json(const MomdpModel& model);
/// Accepts sparse rows ([[index, prob], ...]) or dense arrays.
MomdpModel model_from_json(const Json& j);

Json policy_to_json(const AlphaPolicy& policy);
AlphaPolicy policy_from_json(const Json& j);

Json qtable_to_json(const QTable& q);
QTable qtable_from_json(const Json& j);

/// Unknown fields raise ConfigError naming the JSON path.
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

Json record_to_json(const TrialRecord& r);
TrialRecord record_from_json(const Json& j);
std::string records_to_jsonl(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> records_from_jsonl(const std::string& text);

/// Header `metric,trial_index,mean,ci95_half_width,n`; overall rows use
/// trial_index `all`.
std::string summary_to_csv(const std::vector<MetricSummary>& rows);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace advisor
