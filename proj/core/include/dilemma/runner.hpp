#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dilemma/agents.hpp"
#include "dilemma/aggregate.hpp"
#include "dilemma/corpus.hpp"

namespace dilemma {

inline constexpr int kLogFormatVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Seeded description of a batch experiment: which scenarios, which agent,
/// how many independent initializations of each.
struct RunConfig {
  std::vector<std::string> scenario_keys;
  AgentSpec agent;
  int n_init = 300;
  std::uint64_t run_seed = 0;
  int parallelism = 1;
  int parse_retry_limit = 3;
  std::filesystem::path output_path;
  std::filesystem::path corpus_dir;
  PggSpec pgg;  // parameters used when a key is "pgg"
  ParsePolicy parse_policy;
};

enum class TrialStatus { Ok, Invalid };

/// One persisted agent invocation. status is Invalid only after the parse
/// retry budget is exhausted; the last raw answer is kept either way.
struct Trial {
  std::string scenario_key;
  int trial_index = 0;
  AgentResponse response;
  TrialStatus status = TrialStatus::Ok;
  std::string timestamp;            // ISO-8601 UTC
  bool is_contribution = false;     // selects the action vs contribution log field
};

struct ScenarioTally {
  std::int64_t ok = 0;
  std::int64_t invalid = 0;

  bool operator==(const ScenarioTally&) const = default;
};

struct RunManifest {
  int format_version = kLogFormatVersion;
  std::string tool_version{kToolVersion};
  std::string status;  // "running" | "complete" | "aborted"
  RunConfig config;
  std::string config_hash;
  std::vector<Corpus::Entry> corpus_entries;
  std::string started_at;
  std::string ended_at;
  std::map<std::string, ScenarioTally> per_scenario;
};

/// The manifest lives next to the trial log: <output>.manifest.json.
std::filesystem::path manifest_path_for(const std::filesystem::path& output_path);

/// Executes the configured trials with a bounded worker pool, appending each
/// finished trial to the JSONL log through a single serialized writer. The
/// manifest is written up front (status "running") and rewritten on
/// completion; on an agent failure the partial log and an "aborted" manifest
/// are retained and AbortedRun is thrown.
RunManifest run(const RunConfig& config, const Corpus& corpus);

/// Fills the (scenario, index) slots missing from an interrupted run. The
/// embedded config must hash-match and the corpus on disk must still match
/// the manifest's checksums. Resuming a completed run is a no-op.
RunManifest resume(const std::filesystem::path& manifest_path);

RunManifest read_manifest(const std::filesystem::path& manifest_path);

/// Strict order-independent fold of a trial log into per-scenario counts.
/// Throws LogCorrupt with the offending 1-based line number.
AggregateMap aggregate(const std::filesystem::path& trial_log);

std::vector<Trial> read_trials(const std::filesystem::path& trial_log);

/// Canonical form for comparing logs across runs: trials sorted by
/// (scenario_key, trial_index) and serialized without the wall-clock fields
/// (timestamp, latency).
std::vector<std::string> canonical_log_lines(const std::filesystem::path& trial_log);

/// Resolves a scenario key to the immutable per-trial input handed to agents.
TrialInput resolve_trial_input(const Corpus& corpus, const std::string& scenario_key,
                               const PggSpec& pgg);

}  // namespace dilemma
