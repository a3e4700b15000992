#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dilemma/corpus.hpp"
#include "dilemma/games.hpp"

namespace dilemma {

struct AlpacaRecord {
  std::string instruction;  // rendered system prompt
  std::string input;        // rendered game prompt
  std::string output;       // the agent's raw answer, motivation included
};

struct AlpacaExportOptions {
  bool include_invalid = false;
  bool jsonl = false;  // default is a single JSON array
  /// Alternate field mapping for consumers that expect a lone instruction:
  /// instruction = system + blank line + game prompt, input = "".
  bool concat_instruction = false;
};

struct AlpacaExportResult {
  std::size_t n_records = 0;
  std::size_t n_skipped_invalid = 0;
};

/// Exports a trial log as alpaca-format fine-tuning records, one per Ok
/// trial, re-rendering the canonical prompts for each scenario key. The "pgg"
/// scenario renders with the given spec (pass the run's spec for fidelity).
AlpacaExportResult export_alpaca(const std::filesystem::path& trial_log, const Corpus& corpus,
                                 const std::filesystem::path& out_path,
                                 const AlpacaExportOptions& options = {},
                                 const PggSpec& pgg = {});

/// In-memory variant used by the file exporter and tests.
std::vector<AlpacaRecord> collect_alpaca_records(const std::filesystem::path& trial_log,
                                                 const Corpus& corpus,
                                                 const AlpacaExportOptions& options = {},
                                                 const PggSpec& pgg = {});

struct ValidationIssue {
  std::size_t record_index = 0;
  std::string reason;
};

struct ValidationReport {
  std::size_t n_records = 0;
  std::size_t n_bad = 0;
  std::vector<ValidationIssue> issues;
};

/// Checks field presence, non-emptiness, and that every output carries a
/// parseable answer (a standalone C/D token or a numeric contribution).
/// Accepts both the array form and JSONL.
ValidationReport validate_alpaca(const std::filesystem::path& dataset_file);

}  // namespace dilemma
