#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <tuple>
#include <variant>

#include "dilemma/errors.hpp"
#include "json_codec.hpp"

namespace dilemma {

namespace codec {

using nlohmann::json;

namespace {

std::string rat_string(const Rat& r) {
  return to_display_string(r);
}

Rat rat_field(const json& j, const char* what) {
  auto r = parse_rational(j.get<std::string>());
  if (!r) throw ConfigError(std::string("not a rational ") + what + ": " + j.dump());
  return *r;
}

json parse_policy_to_json(const ParsePolicy& p) {
  return json{{"case_insensitive", p.case_insensitive}, {"final_token_wins", p.final_token_wins}};
}

ParsePolicy parse_policy_from_json(const json& j) {
  ParsePolicy p;
  p.case_insensitive = j.at("case_insensitive").get<bool>();
  p.final_token_wins = j.at("final_token_wins").get<bool>();
  return p;
}

json pgg_to_json(const PggSpec& s) {
  return json{{"n_players", s.n_players},
              {"endowment", rat_string(s.endowment)},
              {"multiplier", rat_string(s.multiplier)}};
}

PggSpec pgg_from_json(const json& j) {
  return PggSpec::make(j.at("n_players").get<int>(), rat_field(j.at("endowment"), "endowment"),
                       rat_field(j.at("multiplier"), "multiplier"));
}

}  // namespace

json agent_to_json(const AgentSpec& spec) {
  json j{{"kind", agent_kind(spec)}};
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FixedAgentSpec>) {
          j["action"] = action_name(s.action);
        } else if constexpr (std::is_same_v<T, TableAgentSpec>) {
          j["coop_prob"] = s.coop_prob;
          if (s.default_prob) j["default_prob"] = *s.default_prob;
        } else if constexpr (std::is_same_v<T, RationalAgentSpec>) {
          j["conjecture_q"] = rat_string(s.conjecture_q);
        } else if constexpr (std::is_same_v<T, LlmHttpSpec>) {
          j["endpoint_url"] = s.endpoint_url;
          j["model_name"] = s.model_name;
          j["temperature"] = s.temperature;
          if (s.max_tokens) j["max_tokens"] = *s.max_tokens;
          j["ask_motivation"] = s.ask_motivation;
          j["timeout_ms"] = s.timeout.count();
          j["auth_token_env"] = s.auth_token_env;
          j["extra_params"] = s.extra_params;
          j["retry"] = json{{"base_ms", s.retry.base.count()},
                            {"factor", s.retry.factor},
                            {"cap_ms", s.retry.cap.count()},
                            {"max_retries", s.retry.max_retries}};
        }
      },
      spec);
  return j;
}

AgentSpec agent_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "fixed") {
    const std::string a = j.at("action").get<std::string>();
    if (a != "C" && a != "D") throw ConfigError("fixed agent action must be C or D");
    return FixedAgentSpec{a == "C" ? Action::Cooperate : Action::Defect};
  }
  if (kind == "table") {
    TableAgentSpec s;
    s.coop_prob = j.at("coop_prob").get<std::map<std::string, double>>();
    if (j.contains("default_prob")) s.default_prob = j.at("default_prob").get<double>();
    return s;
  }
  if (kind == "rational") {
    return RationalAgentSpec{rat_field(j.at("conjecture_q"), "conjecture")};
  }
  if (kind == "mixed-ne") return MixedNeAgentSpec{};
  if (kind == "llm-http") {
    LlmHttpSpec s;
    s.endpoint_url = j.at("endpoint_url").get<std::string>();
    s.model_name = j.at("model_name").get<std::string>();
    s.temperature = j.at("temperature").get<double>();
    if (j.contains("max_tokens")) s.max_tokens = j.at("max_tokens").get<int>();
    s.ask_motivation = j.at("ask_motivation").get<bool>();
    s.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<long long>());
    s.auth_token_env = j.at("auth_token_env").get<std::string>();
    s.extra_params = j.at("extra_params").get<std::map<std::string, double>>();
    const json& r = j.at("retry");
    s.retry.base = std::chrono::milliseconds(r.at("base_ms").get<long long>());
    s.retry.factor = r.at("factor").get<double>();
    s.retry.cap = std::chrono::milliseconds(r.at("cap_ms").get<long long>());
    s.retry.max_retries = r.at("max_retries").get<int>();
    return s;
  }
  throw ConfigError("unknown agent kind: " + kind);
}

json config_to_json(const RunConfig& config) {
  return json{{"scenarios", config.scenario_keys},
              {"agent", agent_to_json(config.agent)},
              {"n_init", config.n_init},
              {"run_seed", config.run_seed},
              {"parallelism", config.parallelism},
              {"parse_retry_limit", config.parse_retry_limit},
              {"output_path", config.output_path.string()},
              {"corpus_dir", config.corpus_dir.string()},
              {"pgg", pgg_to_json(config.pgg)},
              {"parse_policy", parse_policy_to_json(config.parse_policy)}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.scenario_keys = j.at("scenarios").get<std::vector<std::string>>();
  c.agent = agent_from_json(j.at("agent"));
  c.n_init = j.at("n_init").get<int>();
  c.run_seed = j.at("run_seed").get<std::uint64_t>();
  c.parallelism = j.at("parallelism").get<int>();
  c.parse_retry_limit = j.at("parse_retry_limit").get<int>();
  c.output_path = j.at("output_path").get<std::string>();
  c.corpus_dir = j.at("corpus_dir").get<std::string>();
  c.pgg = pgg_from_json(j.at("pgg"));
  c.parse_policy = parse_policy_from_json(j.at("parse_policy"));
  return c;
}

std::string config_hash(const RunConfig& config) {
  return sha256_hex(config_to_json(config).dump());
}

json trial_to_json(const Trial& trial, bool include_volatile) {
  json j{{"format_version", kLogFormatVersion},
         {"scenario", trial.scenario_key},
         {"index", trial.trial_index},
         {"attempt", trial.response.attempt},
         {"status", trial.status == TrialStatus::Ok ? "ok" : "invalid"},
         {"raw_text", trial.response.raw_text}};

  const char* value_key = trial.is_contribution ? "contribution" : "action";
  if (const auto* action = std::get_if<Action>(&trial.response.parsed)) {
    j[value_key] = action_name(*action);
  } else if (const auto* amount = std::get_if<double>(&trial.response.parsed)) {
    j[value_key] = *amount;
  } else {
    j[value_key] = nullptr;
    j["failure_reason"] =
        parse_failure_reason_name(std::get<ParseFailure>(trial.response.parsed).reason);
  }
  j["motivation"] = trial.response.motivation ? json(*trial.response.motivation) : json();
  if (include_volatile) {
    j["latency_ms"] = trial.response.latency_ms;
    j["ts"] = trial.timestamp;
  }
  return j;
}

Trial trial_from_json(const json& j) {
  Trial t;
  t.scenario_key = j.at("scenario").get<std::string>();
  t.trial_index = j.at("index").get<int>();
  t.response.attempt = j.at("attempt").get<int>();
  const std::string status = j.at("status").get<std::string>();
  if (status != "ok" && status != "invalid") throw ConfigError("bad trial status: " + status);
  t.status = status == "ok" ? TrialStatus::Ok : TrialStatus::Invalid;
  t.response.raw_text = j.at("raw_text").get<std::string>();
  t.is_contribution = j.contains("contribution");

  const json& value = t.is_contribution ? j.at("contribution") : j.at("action");
  if (value.is_null()) {
    ParseFailure f;
    if (j.contains("failure_reason")) {
      const std::string r = j.at("failure_reason").get<std::string>();
      f.reason = r == "ambiguous"      ? ParseFailureReason::Ambiguous
                 : r == "out-of-range" ? ParseFailureReason::OutOfRange
                                       : ParseFailureReason::Missing;
    }
    t.response.parsed = f;
  } else if (t.is_contribution) {
    t.response.parsed = value.get<double>();
  } else {
    const std::string a = value.get<std::string>();
    if (a != "C" && a != "D") throw ConfigError("bad trial action: " + a);
    t.response.parsed = a == "C" ? Action::Cooperate : Action::Defect;
  }
  if (j.contains("motivation") && !j.at("motivation").is_null()) {
    t.response.motivation = j.at("motivation").get<std::string>();
  }
  if (j.contains("latency_ms")) t.response.latency_ms = j.at("latency_ms").get<double>();
  if (j.contains("ts")) t.timestamp = j.at("ts").get<std::string>();
  return t;
}

json manifest_to_json(const RunManifest& m) {
  json per_scenario = json::object();
  for (const auto& [key, tally] : m.per_scenario) {
    per_scenario[key] = json{{"ok", tally.ok}, {"invalid", tally.invalid}};
  }
  json corpus = json::array();
  for (const auto& e : m.corpus_entries) {
    corpus.push_back(json{{"kind", e.kind},
                          {"id", e.id},
                          {"sample", e.sample},
                          {"file", e.file},
                          {"sha256", e.sha256}});
  }
  return json{{"format_version", m.format_version},
              {"tool_version", m.tool_version},
              {"status", m.status},
              {"config", config_to_json(m.config)},
              {"config_hash", m.config_hash},
              {"corpus", corpus},
              {"conventions",
               json{{"motivation_request", motivation_request_sentence()},
                    {"contribution_prompt_is_harness_convention", true},
                    {"alpaca_input_is_canonical_prompt", true}}},
              {"started_at", m.started_at},
              {"ended_at", m.ended_at.empty() ? json() : json(m.ended_at)},
              {"per_scenario", per_scenario}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.format_version = j.at("format_version").get<int>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.status = j.at("status").get<std::string>();
  m.config = config_from_json(j.at("config"));
  m.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& e : j.at("corpus")) {
    m.corpus_entries.push_back({e.at("kind").get<std::string>(), e.at("id").get<std::string>(),
                                e.at("sample").get<std::string>(), e.at("file").get<std::string>(),
                                e.at("sha256").get<std::string>()});
  }
  m.started_at = j.at("started_at").get<std::string>();
  if (!j.at("ended_at").is_null()) m.ended_at = j.at("ended_at").get<std::string>();
  for (const auto& [key, tally] : j.at("per_scenario").items()) {
    m.per_scenario[key] =
        ScenarioTally{tally.at("ok").get<std::int64_t>(), tally.at("invalid").get<std::int64_t>()};
  }
  return m;
}

std::string iso_utc_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()) % 1000;
  const std::time_t secs = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms.count()));
  return buf;
}

LogScan scan_log_tolerant(const std::filesystem::path& trial_log) {
  LogScan scan;
  std::ifstream in(trial_log, std::ios::binary);
  if (!in) return scan;
  std::string line;
  while (std::getline(in, line)) {
    const bool has_newline = !in.eof();
    bool ok = false;
    if (!line.empty()) {
      try {
        const Trial t = trial_from_json(json::parse(line));
        if (!scan.done.insert({t.scenario_key, t.trial_index}).second) {
          throw LogCorrupt(scan.done.size(), "duplicate trial slot " + t.scenario_key + "/" +
                                                 std::to_string(t.trial_index));
        }
        ok = true;
      } catch (const json::exception&) {
        ok = false;
      } catch (const ConfigError&) {
        ok = false;
      }
    }
    if (ok) {
      scan.valid_bytes += line.size() + (has_newline ? 1 : 0);
    } else if (!has_newline) {
      // torn tail from an interrupted write; caller may truncate it away
      scan.torn_tail = true;
      break;
    } else if (line.empty()) {
      scan.valid_bytes += 1;
    } else {
      throw LogCorrupt(scan.done.size() + 1, "unparseable interior line");
    }
  }
  return scan;
}

}  // namespace codec

std::vector<Trial> read_trials(const std::filesystem::path& trial_log) {
  std::ifstream in(trial_log, std::ios::binary);
  if (!in) throw StorageError("cannot open trial log: " + trial_log.string());
  std::vector<Trial> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      trials.push_back(codec::trial_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw LogCorrupt(line_no, e.what());
    } catch (const ConfigError& e) {
      throw LogCorrupt(line_no, e.what());
    }
  }
  return trials;
}

AggregateMap aggregate(const std::filesystem::path& trial_log) {
  // Canonicalize on trial indices first so the fold is independent of the
  // order trials were appended in (contributions keep trial-index order).
  std::vector<Trial> trials = read_trials(trial_log);
  std::sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
    return std::tie(a.scenario_key, a.trial_index) < std::tie(b.scenario_key, b.trial_index);
  });
  AggregateMap agg;
  for (const Trial& t : trials) {
    ScenarioCounts& c = agg[t.scenario_key];
    if (t.status == TrialStatus::Invalid) {
      ++c.n_invalid;
      continue;
    }
    ++c.n_ok;
    if (const auto* action = std::get_if<Action>(&t.response.parsed)) {
      (*action == Action::Cooperate ? c.n_coop : c.n_defect) += 1;
    } else if (const auto* amount = std::get_if<double>(&t.response.parsed)) {
      c.contributions.push_back(*amount);
    }
  }
  return agg;
}

std::vector<std::string> canonical_log_lines(const std::filesystem::path& trial_log) {
  std::vector<Trial> trials = read_trials(trial_log);
  std::sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
    return std::tie(a.scenario_key, a.trial_index) < std::tie(b.scenario_key, b.trial_index);
  });
  std::vector<std::string> lines;
  lines.reserve(trials.size());
  for (const Trial& t : trials) {
    lines.push_back(codec::trial_to_json(t, /*include_volatile=*/false).dump());
  }
  return lines;
}

}  // namespace dilemma
