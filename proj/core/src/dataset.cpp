#include "dilemma/dataset.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <variant>

#include "dilemma/agents.hpp"
#include "dilemma/errors.hpp"
#include "dilemma/runner.hpp"

#include <nlohmann/json.hpp>

namespace dilemma {

using nlohmann::json;

namespace {

bool output_parseable(const std::string& output) {
  // Motivated answers may mention both letters; the final standalone token
  // decides, so any token at all counts as parseable here.
  ParsePolicy lenient;
  lenient.final_token_wins = true;
  if (!std::holds_alternative<ParseFailure>(parse_action(output, lenient))) return true;
  static const std::regex number(R"(-?\d+(?:\.\d+)?)");
  return std::regex_search(output, number);
}

nlohmann::ordered_json record_to_json(const AlpacaRecord& r) {
  // keep the conventional instruction/input/output field order on disk
  nlohmann::ordered_json j;
  j["instruction"] = r.instruction;
  j["input"] = r.input;
  j["output"] = r.output;
  return j;
}

}  // namespace

std::vector<AlpacaRecord> collect_alpaca_records(const std::filesystem::path& trial_log,
                                                 const Corpus& corpus,
                                                 const AlpacaExportOptions& options,
                                                 const PggSpec& pgg) {
  std::map<std::string, PromptBundle> bundles;
  auto bundle_for = [&](const std::string& key) -> const PromptBundle& {
    auto it = bundles.find(key);
    if (it != bundles.end()) return it->second;
    try {
      return bundles.emplace(key, resolve_trial_input(corpus, key, pgg).bundle).first->second;
    } catch (const UnknownScenario& e) {
      throw UnresolvableScenario(e.what());
    }
  };

  std::vector<AlpacaRecord> records;
  for (const Trial& t : read_trials(trial_log)) {
    if (t.status == TrialStatus::Invalid && !options.include_invalid) continue;
    const PromptBundle& bundle = bundle_for(t.scenario_key);
    AlpacaRecord rec;
    if (options.concat_instruction) {
      rec.instruction = bundle.system + "\n\n" + bundle.user;
      rec.input = "";
    } else {
      rec.instruction = bundle.system;
      rec.input = bundle.user;
    }
    rec.output = t.response.raw_text;
    records.push_back(std::move(rec));
  }
  return records;
}

AlpacaExportResult export_alpaca(const std::filesystem::path& trial_log, const Corpus& corpus,
                                 const std::filesystem::path& out_path,
                                 const AlpacaExportOptions& options, const PggSpec& pgg) {
  const auto records = collect_alpaca_records(trial_log, corpus, options, pgg);

  AlpacaExportResult result;
  result.n_records = records.size();
  {
    // count what the filter dropped, for the result report
    std::size_t total = read_trials(trial_log).size();
    result.n_skipped_invalid = options.include_invalid ? 0 : total - records.size();
  }

  if (const auto parent = out_path.parent_path(); !parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot write dataset: " + out_path.string());

  if (options.jsonl) {
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
  } else {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) arr.push_back(record_to_json(r));
    out << arr.dump(2) << '\n';
  }
  if (!out) throw StorageError("failed writing dataset: " + out_path.string());
  return result;
}

ValidationReport validate_alpaca(const std::filesystem::path& dataset_file) {
  std::ifstream in(dataset_file, std::ios::binary);
  if (!in) throw MalformedFile("cannot open dataset: " + dataset_file.string());

  json arr;
  // array form, or JSONL when the first non-space byte is '{'
  char first = 0;
  in >> std::ws;
  in.get(first);
  in.unget();
  try {
    if (first == '{') {
      arr = json::array();
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        arr.push_back(json::parse(line));
      }
    } else {
      in >> arr;
      if (!arr.is_array()) throw MalformedFile("dataset is not a JSON array");
    }
  } catch (const json::exception& e) {
    throw MalformedFile("dataset does not parse: " + std::string(e.what()));
  }

  ValidationReport report;
  report.n_records = arr.size();
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& rec = arr[i];
    auto flag = [&](const std::string& reason) {
      report.issues.push_back({i, reason});
    };
    const std::size_t issues_before = report.issues.size();
    if (!rec.is_object()) {
      flag("record is not an object");
    } else {
      for (const char* field : {"instruction", "input", "output"}) {
        if (!rec.contains(field)) {
          flag(std::string("missing field ") + field);
        } else if (!rec.at(field).is_string()) {
          flag(std::string("field is not a string: ") + field);
        }
      }
      if (rec.contains("instruction") && rec.at("instruction").is_string() &&
          rec.at("instruction").get<std::string>().empty()) {
        flag("empty instruction");
      }
      if (rec.contains("output") && rec.at("output").is_string()) {
        const std::string output = rec.at("output").get<std::string>();
        if (output.empty()) {
          flag("empty output");
        } else if (!output_parseable(output)) {
          flag("unparseable output");
        }
      }
    }
    if (report.issues.size() != issues_before) ++report.n_bad;
  }
  return report;
}

}  // namespace dilemma
