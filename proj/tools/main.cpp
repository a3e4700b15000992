// dilemma: batch evaluation harness for strategic decision-making agents on
// social-dilemma scenarios. Runs seeded experiments against pluggable
// backends, exports fine-tuning datasets, and computes behavioral reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dilemma/agents.hpp"
#include "dilemma/corpus.hpp"
#include "dilemma/dataset.hpp"
#include "dilemma/errors.hpp"
#include "dilemma/games.hpp"
#include "dilemma/reports.hpp"
#include "dilemma/runner.hpp"
#include "dilemma/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dilemma;

namespace {

fs::path locate_corpus(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DILEMMA_CORPUS_DIR"); env && *env) return env;

  std::error_code ec;
  const fs::path exe = fs::canonical("/proc/self/exe", ec);
  if (!ec) {
    const fs::path installed = exe.parent_path().parent_path() / "share" / "dilemma" / "corpus";
    if (fs::exists(installed / "manifest")) return installed;
  }
#ifdef DILEMMA_SOURCE_CORPUS_DIR
  if (fs::exists(fs::path(DILEMMA_SOURCE_CORPUS_DIR) / "manifest")) {
    return DILEMMA_SOURCE_CORPUS_DIR;
  }
#endif
  if (fs::exists("corpus/manifest")) return "corpus";
  throw ConfigError(
      "no corpus found; pass --corpus DIR or set DILEMMA_CORPUS_DIR");
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot write " + out_path);
  out << text;
}

std::set<SampleClass> parse_sample_filter(const std::string& name) {
  if (name == "in" || name == "in-sample") return {SampleClass::InSample};
  if (name == "oos-game" || name == "oos-games") return {SampleClass::OoSGame};
  if (name == "oos-context" || name == "oos-contexts") return {SampleClass::OoSContext};
  if (name == "oos-both") return {SampleClass::OoSBoth};
  if (name == "all") {
    return {SampleClass::InSample, SampleClass::OoSGame, SampleClass::OoSContext,
            SampleClass::OoSBoth};
  }
  throw ConfigError("unknown sample filter: " + name +
                    " (want in|oos-game|oos-context|oos-both|all)");
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> expand_scenarios(const std::string& arg, const Corpus& corpus) {
  std::vector<std::string> keys;
  std::set<std::string> seen;
  auto add = [&](const std::string& k) {
    if (seen.insert(k).second) keys.push_back(k);
  };
  for (const std::string& token : split_csv(arg)) {
    if (token == "in" || token == "in-sample" || token == "oos-game" || token == "oos-games" ||
        token == "oos-context" || token == "oos-contexts" || token == "oos-both" ||
        token == "all") {
      for (const Scenario& s : corpus.enumerate_scenarios(parse_sample_filter(token))) {
        add(s.scenario_key);
      }
    } else if (token == kPggScenarioKey) {
      add(token);
    } else {
      (void)corpus.scenario_from_key(token);  // validate
      add(token);
    }
  }
  if (keys.empty()) throw ConfigError("no scenarios selected");
  return keys;
}

Rat parse_rat_flag(const std::string& text, const char* what) {
  auto r = parse_rational(text);
  if (!r) throw ConfigError(std::string("not a number for ") + what + ": " + text);
  return *r;
}

struct LlmFlags {
  std::string endpoint;
  std::string model;
  double temperature = 0.8;
  int max_tokens = 0;
  long long timeout_ms = 120000;
  bool ask_motivation = false;
  std::string auth_env;
};

AgentSpec parse_agent(const std::string& arg, const LlmFlags& llm) {
  const auto colon = arg.find(':');
  const std::string kind = arg.substr(0, colon);
  const std::string param = colon == std::string::npos ? "" : arg.substr(colon + 1);

  if (kind == "fixed") {
    if (param != "C" && param != "D") throw ConfigError("use fixed:C or fixed:D");
    return FixedAgentSpec{param == "C" ? Action::Cooperate : Action::Defect};
  }
  if (kind == "rational") {
    return RationalAgentSpec{parse_rat_flag(param.empty() ? "0.5" : param, "conjecture")};
  }
  if (kind == "mixedne" || kind == "mixed-ne") return MixedNeAgentSpec{};
  if (kind == "table") {
    TableAgentSpec spec;
    if (param.empty()) throw ConfigError("use table:<prob> or table:<map.json>");
    if (auto p = parse_rational(param)) {
      spec.default_prob = to_double(*p);
      return spec;
    }
    std::ifstream in(param);
    if (!in) throw ConfigError("cannot open table agent file: " + param);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("table agent file does not parse: " + std::string(e.what()));
    }
    for (const auto& [key, value] : j.items()) {
      if (key == "default") {
        spec.default_prob = value.get<double>();
      } else {
        spec.coop_prob[key] = value.get<double>();
      }
    }
    return spec;
  }
  if (kind == "llm" || kind == "llm-http") {
    if (llm.endpoint.empty()) throw ConfigError("llm agent needs --endpoint");
    LlmHttpSpec spec;
    spec.endpoint_url = llm.endpoint;
    spec.model_name = llm.model;
    spec.temperature = llm.temperature;
    if (llm.max_tokens > 0) spec.max_tokens = llm.max_tokens;
    spec.timeout = std::chrono::milliseconds(llm.timeout_ms);
    spec.ask_motivation = llm.ask_motivation;
    spec.auth_token_env = llm.auth_env;
    return spec;
  }
  throw ConfigError("unknown agent: " + arg +
                    " (want fixed:C|fixed:D|rational:Q|mixedne|table:...|llm)");
}

Denominator parse_denominator(const std::string& name) {
  if (name == "ok") return Denominator::OkTrials;
  if (name == "all") return Denominator::AllTrials;
  throw ConfigError("unknown denominator: " + name + " (want ok|all)");
}

json manifest_summary(const RunManifest& manifest) {
  json per = json::object();
  std::int64_t ok = 0;
  std::int64_t invalid = 0;
  for (const auto& [key, tally] : manifest.per_scenario) {
    per[key] = json{{"ok", tally.ok}, {"invalid", tally.invalid}};
    ok += tally.ok;
    invalid += tally.invalid;
  }
  return json{{"status", manifest.status},
              {"log", manifest.config.output_path.string()},
              {"manifest", manifest_path_for(manifest.config.output_path).string()},
              {"scenarios", manifest.config.scenario_keys.size()},
              {"n_init", manifest.config.n_init},
              {"trials_ok", ok},
              {"trials_invalid", invalid},
              {"per_scenario", per}};
}

void print_run_summary(const RunManifest& manifest, const std::string& format) {
  if (format == "json") {
    std::cout << manifest_summary(manifest).dump(2) << '\n';
    return;
  }
  std::int64_t ok = 0;
  std::int64_t invalid = 0;
  for (const auto& [key, tally] : manifest.per_scenario) {
    ok += tally.ok;
    invalid += tally.invalid;
  }
  std::cout << "status: " << manifest.status << "\n"
            << "trials: " << ok + invalid << " (" << ok << " ok, " << invalid << " invalid)\n"
            << "log: " << manifest.config.output_path.string() << "\n"
            << "manifest: " << manifest_path_for(manifest.config.output_path).string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch evaluation harness for strategic decision-making agents"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style key/value config file; flags win over it");
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string corpus_flag;
  app.add_option("--corpus", corpus_flag, "Corpus directory (default: env/installed corpus)")
      ->envname("DILEMMA_CORPUS_DIR");

  // scenarios list
  auto* scenarios_cmd = app.add_subcommand("scenarios", "Inspect the scenario grid");
  auto* list_cmd = scenarios_cmd->add_subcommand("list", "List scenario keys");
  std::string list_sample = "in";
  std::string list_format = "text";
  list_cmd->add_option("--sample", list_sample, "in|oos-game|oos-context|oos-both|all");
  list_cmd->add_option("--format", list_format, "text|json");

  // run / resume
  auto* run_cmd = app.add_subcommand("run", "Run a seeded batch experiment");
  std::string run_agent;
  std::string run_scenarios;
  std::string run_out;
  int run_n = 300;
  std::uint64_t run_seed = 0;
  int run_parallelism = 1;
  int run_retry_limit = 3;
  bool run_case_insensitive = false;
  int pgg_players = 4;
  std::string pgg_endowment = "10";
  std::string pgg_multiplier = "1.6";
  std::string run_format = "text";
  LlmFlags llm;
  run_cmd->add_option("--agent", run_agent, "fixed:C|fixed:D|rational:Q|mixedne|table:...|llm")
      ->required();
  run_cmd->add_option("--scenarios", run_scenarios,
                      "Comma-separated keys and/or groups (in, oos-game, oos-context, oos-both, "
                      "all, pgg)")
      ->required();
  run_cmd->add_option("--out", run_out, "Trial log path (JSONL)")->required();
  run_cmd->add_option("--n", run_n, "Initializations per scenario")->capture_default_str();
  run_cmd->add_option("--seed", run_seed, "Run seed")->capture_default_str();
  run_cmd->add_option("--parallelism", run_parallelism, "Concurrent trials")
      ->capture_default_str();
  run_cmd->add_option("--retry-limit", run_retry_limit, "Parse retries per trial")
      ->capture_default_str();
  run_cmd->add_flag("--case-insensitive", run_case_insensitive,
                    "Accept lowercase c/d answers");
  run_cmd->add_option("--endpoint", llm.endpoint, "Chat-completions endpoint URL");
  run_cmd->add_option("--model", llm.model, "Model name sent to the endpoint");
  run_cmd->add_option("--temperature", llm.temperature, "Sampling temperature")
      ->capture_default_str();
  run_cmd->add_option("--max-tokens", llm.max_tokens, "Completion token cap (0 = omit)");
  run_cmd->add_option("--timeout-ms", llm.timeout_ms, "HTTP timeout")->capture_default_str();
  run_cmd->add_flag("--ask-motivation", llm.ask_motivation,
                    "Request a brief motivation before the answer");
  run_cmd->add_option("--auth-env", llm.auth_env,
                      "Environment variable holding the bearer token");
  run_cmd->add_option("--pgg-players", pgg_players, "Public good game: players")
      ->capture_default_str();
  run_cmd->add_option("--pgg-endowment", pgg_endowment, "Public good game: endowment")
      ->capture_default_str();
  run_cmd->add_option("--pgg-multiplier", pgg_multiplier, "Public good game: multiplier")
      ->capture_default_str();
  run_cmd->add_option("--format", run_format, "text|json summary");

  auto* resume_cmd = app.add_subcommand("resume", "Complete an interrupted run");
  std::string resume_manifest;
  std::string resume_format = "text";
  resume_cmd->add_option("--manifest", resume_manifest, "Path to <log>.manifest.json")
      ->required();
  resume_cmd->add_option("--format", resume_format, "text|json summary");

  // dataset export / validate
  auto* dataset_cmd = app.add_subcommand("dataset", "Fine-tuning dataset operations");
  auto* export_cmd = dataset_cmd->add_subcommand("export", "Export a trial log as alpaca records");
  std::string export_log;
  std::string export_out;
  bool export_include_invalid = false;
  bool export_jsonl = false;
  bool export_concat = false;
  export_cmd->add_option("--log", export_log, "Trial log")->required();
  export_cmd->add_option("--out", export_out, "Dataset output path")->required();
  export_cmd->add_flag("--include-invalid", export_include_invalid,
                       "Keep trials whose answers never parsed");
  export_cmd->add_flag("--jsonl", export_jsonl, "Emit JSONL instead of a JSON array");
  export_cmd->add_flag("--concat-instruction", export_concat,
                       "instruction = system + game prompt, empty input");
  export_cmd->add_option("--pgg-players", pgg_players, "Players used by the run");
  export_cmd->add_option("--pgg-endowment", pgg_endowment, "Endowment used by the run");
  export_cmd->add_option("--pgg-multiplier", pgg_multiplier, "Multiplier used by the run");

  auto* validate_cmd = dataset_cmd->add_subcommand("validate", "Validate an alpaca dataset");
  std::string validate_file;
  std::string validate_format = "text";
  std::size_t validate_max_issues = 20;
  validate_cmd->add_option("--file", validate_file, "Dataset file")->required();
  validate_cmd->add_option("--format", validate_format, "text|json");
  validate_cmd->add_option("--max-issues", validate_max_issues,
                           "Issue lines to print in text mode");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Statistics over trial logs");
  auto* ztest_cmd =
      analyze_cmd->add_subcommand("ztest", "Normal-vs-doubled cooperation comparison");
  std::string zt_normal;
  std::string zt_oos;
  std::string zt_denominator = "ok";
  bool zt_two_sided = false;
  bool zt_inclusive = false;
  std::string zt_format = "md";
  std::string zt_out;
  ztest_cmd->add_option("--normal", zt_normal, "In-sample trial log")->required();
  ztest_cmd->add_option("--oos", zt_oos, "Doubled-payoff trial log")->required();
  ztest_cmd->add_option("--denominator", zt_denominator, "ok|all");
  ztest_cmd->add_flag("--two-sided", zt_two_sided, "Two-sided p-values");
  ztest_cmd->add_flag("--inclusive-stars", zt_inclusive, "Star p-values at the threshold");
  ztest_cmd->add_option("--format", zt_format, "md|csv|json");
  ztest_cmd->add_option("--out", zt_out, "Write to file instead of stdout");

  auto* improve_cmd =
      analyze_cmd->add_subcommand("improvement", "Teacher-alignment improvement metric");
  std::string imp_teacher;
  std::string imp_baseline;
  std::string imp_tuned;
  std::string imp_group_by = "scenario";
  std::string imp_denominator = "ok";
  bool imp_percent = false;
  std::string imp_format = "md";
  std::string imp_out;
  improve_cmd->add_option("--c70", imp_teacher, "Teacher model trial log")->required();
  improve_cmd->add_option("--c7", imp_baseline, "Untuned student trial log")->required();
  improve_cmd->add_option("--c7ft", imp_tuned, "Fine-tuned student trial log")->required();
  improve_cmd->add_option("--group-by", imp_group_by, "scenario|game|context");
  improve_cmd->add_option("--denominator", imp_denominator, "ok|all");
  improve_cmd->add_flag("--percent", imp_percent, "Report values x100");
  improve_cmd->add_option("--format", imp_format, "md|csv|json");
  improve_cmd->add_option("--out", imp_out, "Write to file instead of stdout");

  auto* pgg_cmd = analyze_cmd->add_subcommand("pgg", "Contribution mean and standard error");
  std::vector<std::string> pgg_logs;
  std::string pgg_scenario_key{kPggScenarioKey};
  std::string pgg_format = "text";
  pgg_cmd->add_option("--log", pgg_logs, "Trial log (repeatable)")->required();
  pgg_cmd->add_option("--scenario", pgg_scenario_key, "Scenario key holding contributions");
  pgg_cmd->add_option("--format", pgg_format, "text|json");

  // report
  auto* report_cmd = app.add_subcommand("report", "Plot-ready grouped data");
  std::string rep_log;
  std::string rep_teacher;
  std::string rep_baseline;
  std::string rep_tuned;
  std::string rep_group_by = "game";
  std::string rep_denominator = "ok";
  std::string rep_format = "json";
  std::string rep_out;
  report_cmd->add_option("--log", rep_log, "Trial log for cooperation-rate bars");
  report_cmd->add_option("--c70", rep_teacher, "Teacher log (improvement bars)");
  report_cmd->add_option("--c7", rep_baseline, "Untuned student log (improvement bars)");
  report_cmd->add_option("--c7ft", rep_tuned, "Fine-tuned student log (improvement bars)");
  report_cmd->add_option("--group-by", rep_group_by, "game|context");
  report_cmd->add_option("--denominator", rep_denominator, "ok|all");
  report_cmd->add_option("--format", rep_format, "json|csv");
  report_cmd->add_option("--out", rep_out, "Write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list_cmd->parsed()) {
      const Corpus corpus = Corpus::load(locate_corpus(corpus_flag));
      const auto scenarios = corpus.enumerate_scenarios(parse_sample_filter(list_sample));
      if (list_format == "json") {
        json arr = json::array();
        for (const auto& s : scenarios) {
          arr.push_back(json{{"key", s.scenario_key},
                             {"context", s.context_id},
                             {"game", s.game_id},
                             {"sample_class", sample_class_name(s.sample_class)}});
        }
        std::cout << arr.dump(2) << '\n';
      } else {
        for (const auto& s : scenarios) std::cout << s.scenario_key << '\n';
      }
      return 0;
    }

    if (run_cmd->parsed()) {
      const Corpus corpus = Corpus::load(locate_corpus(corpus_flag));
      RunConfig config;
      config.agent = parse_agent(run_agent, llm);
      config.scenario_keys = expand_scenarios(run_scenarios, corpus);
      config.n_init = run_n;
      config.run_seed = run_seed;
      config.parallelism = run_parallelism;
      config.parse_retry_limit = run_retry_limit;
      config.output_path = run_out;
      config.corpus_dir = corpus.dir();
      config.parse_policy.case_insensitive = run_case_insensitive;
      config.pgg = PggSpec::make(pgg_players, parse_rat_flag(pgg_endowment, "endowment"),
                                 parse_rat_flag(pgg_multiplier, "multiplier"));
      const RunManifest manifest = run(config, corpus);
      print_run_summary(manifest, run_format);
      return 0;
    }

    if (resume_cmd->parsed()) {
      const RunManifest manifest = resume(resume_manifest);
      print_run_summary(manifest, resume_format);
      return 0;
    }

    if (export_cmd->parsed()) {
      const Corpus corpus = Corpus::load(locate_corpus(corpus_flag));
      AlpacaExportOptions options;
      options.include_invalid = export_include_invalid;
      options.jsonl = export_jsonl;
      options.concat_instruction = export_concat;
      const PggSpec pgg = PggSpec::make(pgg_players, parse_rat_flag(pgg_endowment, "endowment"),
                                        parse_rat_flag(pgg_multiplier, "multiplier"));
      const AlpacaExportResult result = export_alpaca(export_log, corpus, export_out, options, pgg);
      std::cout << "records: " << result.n_records << "\n";
      if (result.n_skipped_invalid > 0) {
        std::cout << "skipped invalid trials: " << result.n_skipped_invalid << "\n";
      }
      if (result.n_records == 0) {
        std::cerr << "warning: no exportable trials in " << export_log << "\n";
      }
      return 0;
    }

    if (validate_cmd->parsed()) {
      const ValidationReport report = validate_alpaca(validate_file);
      if (validate_format == "json") {
        json issues = json::array();
        for (const auto& issue : report.issues) {
          issues.push_back(json{{"record", issue.record_index}, {"reason", issue.reason}});
        }
        std::cout << json{{"n_records", report.n_records},
                          {"n_bad", report.n_bad},
                          {"issues", issues}}
                         .dump(2)
                  << '\n';
      } else {
        std::cout << "records: " << report.n_records << ", bad: " << report.n_bad << "\n";
        std::size_t shown = 0;
        for (const auto& issue : report.issues) {
          if (shown++ >= validate_max_issues) {
            std::cout << "  ... " << report.issues.size() - validate_max_issues << " more\n";
            break;
          }
          std::cout << "  record " << issue.record_index << ": " << issue.reason << "\n";
        }
      }
      return report.n_bad == 0 ? 0 : 1;
    }

    if (ztest_cmd->parsed()) {
      ZTestOptions options;
      options.two_sided = zt_two_sided;
      options.inclusive_stars = zt_inclusive;
      const ComparisonReport report = ztest_report(
          aggregate(zt_normal), aggregate(zt_oos), parse_denominator(zt_denominator), options);
      const std::string text = zt_format == "csv"    ? comparison_to_csv(report)
                               : zt_format == "json" ? comparison_to_json(report)
                                                     : comparison_to_markdown(report);
      emit(text, zt_out);
      return 0;
    }

    if (improve_cmd->parsed()) {
      ImprovementReport report =
          improvement_report(aggregate(imp_teacher), aggregate(imp_baseline),
                             aggregate(imp_tuned), parse_group_by(imp_group_by),
                             parse_denominator(imp_denominator));
      report.percent = imp_percent;
      const std::string text = imp_format == "csv"    ? improvement_to_csv(report)
                               : imp_format == "json" ? improvement_to_json(report)
                                                      : improvement_to_markdown(report);
      emit(text, imp_out);
      return 0;
    }

    if (pgg_cmd->parsed()) {
      json rows = json::array();
      for (const auto& log : pgg_logs) {
        const AggregateMap agg = aggregate(log);
        const auto it = agg.find(pgg_scenario_key);
        if (it == agg.end() || it->second.contributions.empty()) {
          throw EmptySample("no contributions for scenario " + pgg_scenario_key + " in " + log);
        }
        const PggStats stats = pgg_stats(it->second.contributions);
        rows.push_back(json{{"log", fs::path(log).stem().string()},
                            {"n", stats.n},
                            {"mean", stats.mean},
                            {"se", stats.se}});
      }
      if (pgg_format == "json") {
        std::cout << rows.dump(2) << '\n';
      } else {
        for (const auto& r : rows) {
          std::cout << r.at("log").get<std::string>() << ": mean "
                    << r.at("mean").get<double>() << ", se " << r.at("se").get<double>()
                    << ", n " << r.at("n").get<std::size_t>() << "\n";
        }
      }
      return 0;
    }

    if (report_cmd->parsed()) {
      const GroupBy group_by = parse_group_by(rep_group_by);
      const Denominator denom = parse_denominator(rep_denominator);
      const bool improvement_mode =
          !rep_teacher.empty() || !rep_baseline.empty() || !rep_tuned.empty();
      if (improvement_mode) {
        if (rep_teacher.empty() || rep_baseline.empty() || rep_tuned.empty()) {
          throw ConfigError("improvement bars need all of --c70, --c7 and --c7ft");
        }
        const ImprovementReport report =
            improvement_report(aggregate(rep_teacher), aggregate(rep_baseline),
                               aggregate(rep_tuned), group_by, denom);
        emit(rep_format == "csv" ? improvement_to_csv(report) : improvement_to_json(report),
             rep_out);
      } else {
        if (rep_log.empty()) throw ConfigError("report needs --log or --c70/--c7/--c7ft");
        const CoopReport report = coop_report(aggregate(rep_log), group_by, denom);
        emit(rep_format == "csv" ? coop_to_csv(report) : coop_to_json(report), rep_out);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::cerr << "error: no subcommand\n";
  return 2;
}
