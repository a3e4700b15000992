#include "dilemma/runner.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <tuple>
#include <variant>

#include "dilemma/errors.hpp"
#include "dilemma/prng.hpp"
#include "json_codec.hpp"

namespace dilemma {

namespace {

struct Slot {
  const std::string* scenario_key;
  int trial_index;
};

void validate_config(const RunConfig& config) {
  if (config.scenario_keys.empty()) throw ConfigError("no scenarios configured");
  if (config.n_init < 1) throw ConfigError("n_init must be >= 1");
  if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (config.parse_retry_limit < 0) throw ConfigError("parse_retry_limit must be >= 0");
  if (config.output_path.empty()) throw ConfigError("output path not set");
  std::set<std::string> unique(config.scenario_keys.begin(), config.scenario_keys.end());
  if (unique.size() != config.scenario_keys.size()) {
    throw ConfigError("duplicate scenario keys in config");
  }
}

void write_manifest(const RunManifest& manifest) {
  const auto path = manifest_path_for(manifest.config.output_path);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write manifest: " + path.string());
    out << codec::manifest_to_json(manifest).dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

/// Single serialized sink for finished trials; workers hand over completed
/// trials and the writer appends them line by line, flushing each one.
class LogWriter {
 public:
  LogWriter(const std::filesystem::path& path, bool append)
      : out_(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc)) {
    if (!out_) throw StorageError("cannot open trial log for writing: " + path.string());
    thread_ = std::thread([this] { drain(); });
  }

  ~LogWriter() {
    finish();
  }

  void push(Trial trial) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(trial));
    }
    cv_.notify_one();
  }

  void finish() {
    {
      std::lock_guard lock(mu_);
      if (done_) return;
      done_ = true;
    }
    cv_.notify_one();
    thread_.join();
    out_.flush();
  }

  const std::map<std::string, ScenarioTally>& tallies() const { return tallies_; }

 private:
  void drain() {
    for (;;) {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return done_ || !queue_.empty(); });
      if (queue_.empty() && done_) return;
      std::deque<Trial> batch;
      batch.swap(queue_);
      lock.unlock();
      for (const Trial& t : batch) {
        auto& tally = tallies_[t.scenario_key];
        (t.status == TrialStatus::Ok ? tally.ok : tally.invalid) += 1;
        out_ << codec::trial_to_json(t, /*include_volatile=*/true).dump() << '\n';
        out_.flush();
      }
    }
  }

  std::ofstream out_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Trial> queue_;
  bool done_ = false;
  std::map<std::string, ScenarioTally> tallies_;  // writer thread only, read after finish()
};

Trial execute_trial(const RunConfig& config, const TrialInput& input, int trial_index) {
  Trial trial;
  trial.scenario_key = input.scenario_key;
  trial.trial_index = trial_index;
  trial.is_contribution = input.pgg.has_value();

  const int max_attempts = config.parse_retry_limit + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    AgentResponse response =
        decide(config.agent, input,
               derive_trial_seed(config.run_seed, input.scenario_key,
                                 static_cast<std::uint64_t>(trial_index),
                                 static_cast<std::uint64_t>(attempt)),
               config.parse_policy);
    response.attempt = attempt;
    trial.response = std::move(response);
    if (!std::holds_alternative<ParseFailure>(trial.response.parsed)) break;
  }
  trial.status = std::holds_alternative<ParseFailure>(trial.response.parsed)
                     ? TrialStatus::Invalid
                     : TrialStatus::Ok;
  trial.timestamp = codec::iso_utc_now();
  return trial;
}

/// Runs the given slots through a bounded pool; returns normally only if
/// every slot was persisted.
void execute_slots(const RunConfig& config,
                   const std::map<std::string, TrialInput>& inputs,
                   const std::vector<std::pair<std::string, int>>& slots, LogWriter& writer) {
  std::atomic<std::size_t> cursor{0};
  std::mutex failure_mu;
  std::optional<std::string> failure;

  auto worker = [&] {
    for (;;) {
      {
        std::lock_guard lock(failure_mu);
        if (failure) return;
      }
      const std::size_t i = cursor.fetch_add(1);
      if (i >= slots.size()) return;
      const auto& [key, index] = slots[i];
      try {
        writer.push(execute_trial(config, inputs.at(key), index));
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = e.what();
        return;
      }
    }
  };

  const int n_threads = std::min<int>(config.parallelism, static_cast<int>(slots.size()));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(std::max(n_threads, 1)));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (failure) throw AbortedRun("run aborted: " + *failure);
}

RunManifest finish_run(RunManifest manifest, LogWriter& writer, bool check_completeness) {
  writer.finish();
  manifest.per_scenario.clear();
  for (const auto& [key, tally] : writer.tallies()) manifest.per_scenario[key] = tally;
  if (check_completeness) {
    for (const auto& key : manifest.config.scenario_keys) {
      const auto it = manifest.per_scenario.find(key);
      const std::int64_t total = it == manifest.per_scenario.end() ? 0 : it->second.ok + it->second.invalid;
      if (total != manifest.config.n_init) {
        throw StorageError("incomplete run: scenario " + key + " persisted " +
                           std::to_string(total) + "/" + std::to_string(manifest.config.n_init) +
                           " trials");
      }
    }
  }
  manifest.status = "complete";
  manifest.ended_at = codec::iso_utc_now();
  write_manifest(manifest);
  return manifest;
}

std::map<std::string, TrialInput> resolve_all(const RunConfig& config, const Corpus& corpus) {
  std::map<std::string, TrialInput> inputs;
  for (const auto& key : config.scenario_keys) {
    inputs.emplace(key, resolve_trial_input(corpus, key, config.pgg));
  }
  // surface table-agent coverage problems before any trial runs
  if (const auto* table = std::get_if<TableAgentSpec>(&config.agent)) {
    for (const auto& key : config.scenario_keys) {
      if (!table->coop_prob.count(key) && !table->default_prob) {
        throw ConfigError("table agent has no cooperation probability for scenario " + key);
      }
    }
  }
  return inputs;
}

}  // namespace

std::filesystem::path manifest_path_for(const std::filesystem::path& output_path) {
  return std::filesystem::path(output_path.string() + ".manifest.json");
}

TrialInput resolve_trial_input(const Corpus& corpus, const std::string& scenario_key,
                               const PggSpec& pgg) {
  TrialInput input;
  input.scenario_key = scenario_key;
  if (scenario_key == kPggScenarioKey) {
    input.bundle = pgg_scenario(pgg);
    input.pgg = pgg;
    return input;
  }
  const Scenario scenario = corpus.scenario_from_key(scenario_key);
  input.bundle = corpus.render(scenario);
  input.payoffs = corpus.scenario_payoffs(scenario);
  return input;
}

RunManifest run(const RunConfig& config, const Corpus& corpus) {
  validate_config(config);
  const auto inputs = resolve_all(config, corpus);

  std::error_code ec;
  if (std::filesystem::exists(config.output_path) &&
      std::filesystem::file_size(config.output_path, ec) > 0) {
    throw StorageError("trial log already exists: " + config.output_path.string() +
                       " (remove it or resume from its manifest)");
  }
  if (const auto parent = config.output_path.parent_path(); !parent.empty()) {
    std::filesystem::create_directories(parent);
  }

  RunManifest manifest;
  manifest.status = "running";
  manifest.config = config;
  manifest.config.corpus_dir = corpus.dir();
  manifest.config_hash = codec::config_hash(manifest.config);
  manifest.corpus_entries = corpus.manifest_entries();
  manifest.started_at = codec::iso_utc_now();
  write_manifest(manifest);

  std::vector<std::pair<std::string, int>> slots;
  slots.reserve(config.scenario_keys.size() * static_cast<std::size_t>(config.n_init));
  for (const auto& key : config.scenario_keys) {
    for (int i = 0; i < config.n_init; ++i) slots.emplace_back(key, i);
  }

  LogWriter writer(config.output_path, /*append=*/false);
  try {
    execute_slots(manifest.config, inputs, slots, writer);
  } catch (const AbortedRun&) {
    writer.finish();
    manifest.status = "aborted";
    for (const auto& [key, tally] : writer.tallies()) manifest.per_scenario[key] = tally;
    write_manifest(manifest);
    throw;
  }
  return finish_run(std::move(manifest), writer, /*check_completeness=*/true);
}

RunManifest read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw StorageError("cannot open manifest: " + manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
    return codec::manifest_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ManifestMismatch("manifest is not readable: " + std::string(e.what()));
  }
}

RunManifest resume(const std::filesystem::path& manifest_path) {
  RunManifest manifest = read_manifest(manifest_path);
  if (codec::config_hash(manifest.config) != manifest.config_hash) {
    throw ManifestMismatch("manifest config hash mismatch; config was edited");
  }
  const Corpus corpus = Corpus::load(manifest.config.corpus_dir);
  {
    auto recorded = manifest.corpus_entries;
    auto current = corpus.manifest_entries();
    auto key = [](const Corpus::Entry& e) {
      return std::tie(e.kind, e.id, e.sample, e.file, e.sha256);
    };
    auto less = [&](const Corpus::Entry& a, const Corpus::Entry& b) { return key(a) < key(b); };
    std::sort(recorded.begin(), recorded.end(), less);
    std::sort(current.begin(), current.end(), less);
    auto equal = [&](const Corpus::Entry& a, const Corpus::Entry& b) { return key(a) == key(b); };
    if (recorded.size() != current.size() ||
        !std::equal(recorded.begin(), recorded.end(), current.begin(), equal)) {
      throw ManifestMismatch("corpus on disk differs from the one recorded in the manifest");
    }
  }

  const auto inputs = resolve_all(manifest.config, corpus);

  codec::LogScan scan = codec::scan_log_tolerant(manifest.config.output_path);
  if (scan.torn_tail) {
    std::filesystem::resize_file(manifest.config.output_path, scan.valid_bytes);
  }
  const std::set<std::string> known(manifest.config.scenario_keys.begin(),
                                    manifest.config.scenario_keys.end());
  for (const auto& [key, index] : scan.done) {
    if (!known.count(key) || index < 0 || index >= manifest.config.n_init) {
      throw ManifestMismatch("trial log contains slots outside the configured run: " + key +
                             "/" + std::to_string(index));
    }
  }

  std::vector<std::pair<std::string, int>> missing;
  for (const auto& key : manifest.config.scenario_keys) {
    for (int i = 0; i < manifest.config.n_init; ++i) {
      if (!scan.done.count({key, i})) missing.emplace_back(key, i);
    }
  }

  LogWriter writer(manifest.config.output_path, /*append=*/true);
  try {
    if (!missing.empty()) execute_slots(manifest.config, inputs, missing, writer);
  } catch (const AbortedRun&) {
    writer.finish();
    manifest.status = "aborted";
    write_manifest(manifest);
    throw;
  }
  writer.finish();

  manifest.per_scenario.clear();
  AggregateMap final_agg = aggregate(manifest.config.output_path);
  for (const auto& [key, counts] : final_agg) {
    manifest.per_scenario[key] = ScenarioTally{counts.n_ok, counts.n_invalid};
  }
  for (const auto& key : manifest.config.scenario_keys) {
    const auto it = manifest.per_scenario.find(key);
    const std::int64_t total =
        it == manifest.per_scenario.end() ? 0 : it->second.ok + it->second.invalid;
    if (total != manifest.config.n_init) {
      throw StorageError("resume left scenario " + key + " incomplete: " +
                         std::to_string(total) + "/" + std::to_string(manifest.config.n_init));
    }
  }
  manifest.status = "complete";
  manifest.ended_at = codec::iso_utc_now();
  write_manifest(manifest);
  return manifest;
}

}  // namespace dilemma
