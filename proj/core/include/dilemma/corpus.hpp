#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dilemma/games.hpp"

namespace dilemma {

enum class SampleTag { InSample, OutOfSample };

/// Which components of a scenario were part of the training grid.
enum class SampleClass { InSample, OoSGame, OoSContext, OoSBoth };

std::string sample_class_name(SampleClass c);

struct Context {
  std::string id;
  SampleTag sample_tag = SampleTag::InSample;
  std::string system_prompt;
  std::optional<std::string> note;
};

struct GamePrompt {
  std::string game_id;
  SampleTag sample_tag = SampleTag::InSample;
  Payoffs payoffs;
  std::string template_text;
};

/// One (context, game) combination. Keys follow the "context_game" naming;
/// doubled-payoff variants carry a "_x2" suffix so key sets stay disjoint
/// across sample classes.
struct Scenario {
  std::string context_id;
  std::string game_id;
  std::string scenario_key;
  SampleClass sample_class = SampleClass::InSample;
};

struct PromptBundle {
  std::string system;
  std::string user;
};

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Substitutes the {R}/{T}/{S}/{P} slots of a game template.
std::string render_template(const std::string& template_text, const Payoffs& payoffs);

/// Inverse of render_template: recovers the payoffs from a rendered prompt.
Payoffs extract_payoffs(const std::string& template_text, const std::string& rendered);

inline constexpr std::string_view kPggScenarioKey = "pgg";

/// Multi-player contribution prompt for the public good game. The text is a
/// harness convention, parameterized by the spec; overrides replace the user
/// template (slots {N}/{E}/{M} are substituted there too).
PromptBundle pgg_scenario(const PggSpec& spec,
                          const std::optional<std::string>& user_template_override = std::nullopt,
                          const std::optional<std::string>& system_override = std::nullopt);

/// The prompt corpus: context texts, game templates and their payoff
/// parameterizations, pinned by a checksum manifest. Loaded once, immutable
/// afterwards; all reads are safe concurrently.
class Corpus {
 public:
  /// Loads and verifies a corpus directory (contexts/, games/, manifest).
  /// Throws CorpusCorrupt when any file's checksum disagrees with the
  /// manifest, and ConfigError for structural problems.
  static Corpus load(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<Context>& contexts() const { return contexts_; }
  const std::vector<GamePrompt>& game_prompts() const { return games_; }

  const Context& context(const std::string& id) const;
  const GamePrompt& game_prompt(const std::string& game_id, SampleTag tag) const;
  bool has_context(const std::string& id) const;
  bool has_game(const std::string& game_id) const;

  std::vector<Scenario> enumerate_scenarios(const std::set<SampleClass>& filter) const;

  /// Parses "context_game" / "context_game_x2" back into a Scenario.
  Scenario scenario_from_key(const std::string& key) const;

  PromptBundle render(const Scenario& scenario) const;

  /// Renders a shipped game template against caller-provided payoffs.
  PromptBundle render_custom(const std::string& context_id, const std::string& game_id,
                             const Payoffs& payoffs) const;

  /// Payoffs used when rendering the given scenario.
  const Payoffs& scenario_payoffs(const Scenario& scenario) const;

  /// Flat view of the manifest for embedding into run manifests.
  struct Entry {
    std::string kind;  // "context" | "game"
    std::string id;
    std::string sample;  // "in" | "out"
    std::string file;
    std::string sha256;
  };
  const std::vector<Entry>& manifest_entries() const { return entries_; }

 private:
  std::filesystem::path dir_;
  std::vector<Context> contexts_;
  std::vector<GamePrompt> games_;
  std::vector<Entry> entries_;
};

/// Strips the doubled-payoff suffix, e.g. "team_prison_x2" -> "team_prison".
std::string base_scenario_key(const std::string& key);

}  // namespace dilemma
