#pragma once

// Internal JSON encodings shared by the runner, log reader, and exporter.

#include <set>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "dilemma/runner.hpp"

namespace dilemma::codec {

nlohmann::json agent_to_json(const AgentSpec& spec);
AgentSpec agent_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);
std::string config_hash(const RunConfig& config);

nlohmann::json trial_to_json(const Trial& trial, bool include_volatile);
Trial trial_from_json(const nlohmann::json& j);

nlohmann::json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

std::string iso_utc_now();

/// Tolerant slot scan used by resume: parseable lines yield their
/// (scenario, index); an unterminated, unparseable tail is reported so the
/// caller can truncate it instead of failing.
struct LogScan {
  std::set<std::pair<std::string, int>> done;
  bool torn_tail = false;
  std::uintmax_t valid_bytes = 0;
};
LogScan scan_log_tolerant(const std::filesystem::path& trial_log);

}  // namespace dilemma::codec
