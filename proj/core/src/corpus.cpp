#include "dilemma/corpus.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dilemma/errors.hpp"

namespace dilemma {

using nlohmann::json;

namespace {

constexpr std::string_view kDoubledSuffix = "_x2";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open corpus file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Rat payoff_field(const json& j) {
  if (j.is_string()) {
    auto r = parse_rational(j.get<std::string>());
    if (!r) throw ConfigError("manifest payoff is not a rational: " + j.dump());
    return *r;
  }
  if (j.is_number_integer()) return Rat(j.get<std::int64_t>());
  if (j.is_number_float()) {
    auto r = rational_from_double(j.get<double>());
    if (!r) throw ConfigError("manifest payoff has no exact rational form: " + j.dump());
    return *r;
  }
  throw ConfigError("manifest payoff has unexpected type: " + j.dump());
}

SampleTag parse_sample(const std::string& s) {
  if (s == "in") return SampleTag::InSample;
  if (s == "out") return SampleTag::OutOfSample;
  throw ConfigError("manifest sample tag must be \"in\" or \"out\", got \"" + s + "\"");
}

std::string slot_value(const Payoffs& p, char slot) {
  switch (slot) {
    case 'R': return to_display_string(p.r);
    case 'T': return to_display_string(p.t);
    case 'S': return to_display_string(p.s);
    case 'P': return to_display_string(p.p);
  }
  throw ConfigError(std::string("unknown template slot {") + slot + "}");
}

bool is_slot(const std::string& tpl, std::size_t i, char* slot) {
  if (i + 2 >= tpl.size()) return false;
  if (tpl[i] != '{' || tpl[i + 2] != '}') return false;
  const char c = tpl[i + 1];
  if (c != 'R' && c != 'T' && c != 'S' && c != 'P') return false;
  *slot = c;
  return true;
}

const std::string kPggSystemText =
    "You are a member of a close-knit neighborhood association, and you are taking part in a "
    "community project together with several of your neighbors. Everyone values the shared "
    "spaces you are improving, but each household also has its own expenses to think about.\n\n"
    "Every participant must privately decide how many of their own points to put into the "
    "common project fund, without knowing what the others will decide. The fund benefits "
    "everyone regardless of who contributed, and all participants are motivated by the same "
    "consideration of ending up with the highest possible number of points.\n\n"
    "The decision happens only once, and you will not have any opportunity for direct "
    "interaction or knowledge of your neighbors' intentions before making your decision. "
    "Henceforth, the other participants will be referred to as \"coplayers.\"";

const std::string kPggUserTemplate =
    "You and your coplayers form a group of {N} participants. Each participant starts with "
    "{E} points and must privately choose how many points to contribute to a common fund, "
    "any amount from 0 to {E}. The total amount contributed will be multiplied by {M} and "
    "then divided equally among all {N} participants, regardless of their contributions. Any "
    "points you do not contribute remain yours. Think carefully about how you would approach "
    "this interaction in order to achieve the highest possible score in points, conditional "
    "on the actions of your coplayers. Please think step by step before making a decision. "
    "Your answer to this question must consist of exactly one number between 0 and {E} to "
    "denote your contribution (no need to explain your reasoning).";

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

}  // namespace

std::string sample_class_name(SampleClass c) {
  switch (c) {
    case SampleClass::InSample: return "in-sample";
    case SampleClass::OoSGame: return "oos-game";
    case SampleClass::OoSContext: return "oos-context";
    case SampleClass::OoSBoth: return "oos-both";
  }
  return "?";
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string render_template(const std::string& tpl, const Payoffs& payoffs) {
  std::string out;
  out.reserve(tpl.size());
  for (std::size_t i = 0; i < tpl.size();) {
    char slot;
    if (is_slot(tpl, i, &slot)) {
      out += slot_value(payoffs, slot);
      i += 3;
    } else {
      out.push_back(tpl[i]);
      ++i;
    }
  }
  return out;
}

Payoffs extract_payoffs(const std::string& tpl, const std::string& rendered) {
  // Turn the template into a regex: first occurrence of a slot becomes a
  // capture group, repeats become backreferences.
  static const std::string number = R"((-?\d+(?:\.\d+)?(?:/\d+)?))";
  std::string pattern;
  std::map<char, int> group_of;
  int next_group = 1;
  for (std::size_t i = 0; i < tpl.size();) {
    char slot;
    if (is_slot(tpl, i, &slot)) {
      auto it = group_of.find(slot);
      if (it == group_of.end()) {
        group_of[slot] = next_group++;
        pattern += number;
      } else {
        pattern += "\\" + std::to_string(it->second);
      }
      i += 3;
    } else {
      if (std::string_view("\\^$.|?*+()[]{}").find(tpl[i]) != std::string_view::npos) {
        pattern.push_back('\\');
      }
      pattern.push_back(tpl[i]);
      ++i;
    }
  }
  std::smatch m;
  if (!std::regex_match(rendered, m, std::regex(pattern))) {
    throw Error("rendered text does not match the game template");
  }
  auto field = [&](char slot) {
    auto it = group_of.find(slot);
    if (it == group_of.end()) throw Error(std::string("template lacks slot {") + slot + "}");
    auto r = parse_rational(m[it->second].str());
    if (!r) throw Error("extracted payoff is not numeric: " + m[it->second].str());
    return *r;
  };
  return Payoffs{field('R'), field('T'), field('S'), field('P')};
}

PromptBundle pgg_scenario(const PggSpec& spec,
                          const std::optional<std::string>& user_template_override,
                          const std::optional<std::string>& system_override) {
  std::string user = user_template_override.value_or(kPggUserTemplate);
  user = replace_all(user, "{N}", std::to_string(spec.n_players));
  user = replace_all(user, "{E}", to_display_string(spec.endowment));
  user = replace_all(user, "{M}", to_display_string(spec.multiplier));
  return PromptBundle{system_override.value_or(kPggSystemText), user};
}

Corpus Corpus::load(const std::filesystem::path& dir) {
  Corpus corpus;
  corpus.dir_ = dir;

  const auto manifest_path = dir / "manifest";
  json manifest;
  {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot open corpus manifest: " + manifest_path.string());
    try {
      in >> manifest;
    } catch (const json::exception& e) {
      throw CorpusCorrupt("corpus manifest is not valid JSON: " + std::string(e.what()));
    }
  }

  auto checked_read = [&](const std::string& rel, const std::string& expected) {
    const std::string bytes = read_file(dir / rel);
    const std::string digest = sha256_hex(bytes);
    if (digest != expected) {
      throw CorpusCorrupt("checksum mismatch for " + rel + ": manifest " + expected +
                          ", file " + digest);
    }
    return bytes;
  };

  try {
    for (const auto& e : manifest.at("contexts")) {
      Context ctx;
      ctx.id = e.at("id").get<std::string>();
      if (ctx.id.find('_') != std::string::npos) {
        throw ConfigError("context id may not contain '_': " + ctx.id);
      }
      ctx.sample_tag = parse_sample(e.at("sample").get<std::string>());
      const std::string file = e.at("file").get<std::string>();
      const std::string digest = e.at("sha256").get<std::string>();
      ctx.system_prompt = checked_read(file, digest);
      if (ctx.system_prompt.empty()) throw CorpusCorrupt("empty context text: " + file);
      if (e.contains("note")) ctx.note = e.at("note").get<std::string>();
      corpus.entries_.push_back({"context", ctx.id, e.at("sample").get<std::string>(), file, digest});
      corpus.contexts_.push_back(std::move(ctx));
    }
    for (const auto& e : manifest.at("games")) {
      GamePrompt game;
      game.game_id = e.at("id").get<std::string>();
      if (game.game_id.find('_') != std::string::npos) {
        throw ConfigError("game id may not contain '_': " + game.game_id);
      }
      game.sample_tag = parse_sample(e.at("sample").get<std::string>());
      const auto& pj = e.at("payoffs");
      game.payoffs = Payoffs::make(payoff_field(pj.at("r")), payoff_field(pj.at("t")),
                                   payoff_field(pj.at("s")), payoff_field(pj.at("p")));
      const std::string file = e.at("file").get<std::string>();
      const std::string digest = e.at("sha256").get<std::string>();
      game.template_text = checked_read(file, digest);
      if (game.template_text.empty()) throw CorpusCorrupt("empty game template: " + file);
      corpus.entries_.push_back({"game", game.game_id, e.at("sample").get<std::string>(), file, digest});
      corpus.games_.push_back(std::move(game));
    }
  } catch (const json::exception& e) {
    throw CorpusCorrupt("corpus manifest is missing fields: " + std::string(e.what()));
  }

  for (std::size_t i = 0; i < corpus.contexts_.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.contexts_.size(); ++j) {
      if (corpus.contexts_[i].id == corpus.contexts_[j].id) {
        throw ConfigError("duplicate context id: " + corpus.contexts_[i].id);
      }
    }
  }
  return corpus;
}

const Context& Corpus::context(const std::string& id) const {
  for (const auto& c : contexts_) {
    if (c.id == id) return c;
  }
  throw UnknownScenario("unknown context: " + id);
}

bool Corpus::has_context(const std::string& id) const {
  return std::any_of(contexts_.begin(), contexts_.end(),
                     [&](const Context& c) { return c.id == id; });
}

bool Corpus::has_game(const std::string& game_id) const {
  return std::any_of(games_.begin(), games_.end(),
                     [&](const GamePrompt& g) { return g.game_id == game_id; });
}

const GamePrompt& Corpus::game_prompt(const std::string& game_id, SampleTag tag) const {
  for (const auto& g : games_) {
    if (g.game_id == game_id && g.sample_tag == tag) return g;
  }
  throw UnknownScenario("unknown game prompt: " + game_id +
                        (tag == SampleTag::OutOfSample ? " (doubled)" : ""));
}

std::vector<Scenario> Corpus::enumerate_scenarios(const std::set<SampleClass>& filter) const {
  std::vector<std::string> in_contexts;
  std::vector<std::string> out_contexts;
  for (const auto& c : contexts_) {
    (c.sample_tag == SampleTag::InSample ? in_contexts : out_contexts).push_back(c.id);
  }
  std::vector<std::string> in_games;
  std::vector<std::string> out_games;
  for (const auto& g : games_) {
    (g.sample_tag == SampleTag::InSample ? in_games : out_games).push_back(g.game_id);
  }
  std::sort(in_contexts.begin(), in_contexts.end());
  std::sort(out_contexts.begin(), out_contexts.end());
  std::sort(in_games.begin(), in_games.end());
  std::sort(out_games.begin(), out_games.end());

  std::vector<Scenario> out;
  auto emit = [&](const std::vector<std::string>& ctxs, const std::vector<std::string>& games,
                  SampleClass cls, bool doubled) {
    for (const auto& c : ctxs) {
      for (const auto& g : games) {
        Scenario sc;
        sc.context_id = c;
        sc.game_id = g;
        sc.sample_class = cls;
        sc.scenario_key = c + "_" + g + (doubled ? std::string(kDoubledSuffix) : "");
        out.push_back(std::move(sc));
      }
    }
  };
  if (filter.count(SampleClass::InSample)) emit(in_contexts, in_games, SampleClass::InSample, false);
  if (filter.count(SampleClass::OoSGame)) emit(in_contexts, out_games, SampleClass::OoSGame, true);
  if (filter.count(SampleClass::OoSContext)) emit(out_contexts, in_games, SampleClass::OoSContext, false);
  if (filter.count(SampleClass::OoSBoth)) emit(out_contexts, out_games, SampleClass::OoSBoth, true);
  return out;
}

std::string base_scenario_key(const std::string& key) {
  if (key.size() > kDoubledSuffix.size() &&
      key.compare(key.size() - kDoubledSuffix.size(), kDoubledSuffix.size(), kDoubledSuffix) == 0) {
    return key.substr(0, key.size() - kDoubledSuffix.size());
  }
  return key;
}

Scenario Corpus::scenario_from_key(const std::string& key) const {
  const std::string base = base_scenario_key(key);
  const bool doubled = base != key;
  const auto sep = base.find('_');
  if (sep == std::string::npos || sep == 0 || sep + 1 >= base.size()) {
    throw UnknownScenario("malformed scenario key: " + key);
  }
  Scenario sc;
  sc.context_id = base.substr(0, sep);
  sc.game_id = base.substr(sep + 1);
  sc.scenario_key = key;
  if (!has_context(sc.context_id)) throw UnknownScenario("unknown context in key: " + key);
  if (!has_game(sc.game_id)) throw UnknownScenario("unknown game in key: " + key);

  const bool ctx_in = context(sc.context_id).sample_tag == SampleTag::InSample;
  if (ctx_in) {
    sc.sample_class = doubled ? SampleClass::OoSGame : SampleClass::InSample;
  } else {
    sc.sample_class = doubled ? SampleClass::OoSBoth : SampleClass::OoSContext;
  }
  // the doubled variant must exist in the corpus
  (void)game_prompt(sc.game_id, doubled ? SampleTag::OutOfSample : SampleTag::InSample);
  return sc;
}

const Payoffs& Corpus::scenario_payoffs(const Scenario& scenario) const {
  const bool doubled = scenario.sample_class == SampleClass::OoSGame ||
                       scenario.sample_class == SampleClass::OoSBoth;
  return game_prompt(scenario.game_id,
                     doubled ? SampleTag::OutOfSample : SampleTag::InSample)
      .payoffs;
}

PromptBundle Corpus::render(const Scenario& scenario) const {
  const Context& ctx = context(scenario.context_id);
  const bool doubled = scenario.sample_class == SampleClass::OoSGame ||
                       scenario.sample_class == SampleClass::OoSBoth;
  const GamePrompt& game = game_prompt(
      scenario.game_id, doubled ? SampleTag::OutOfSample : SampleTag::InSample);
  return PromptBundle{ctx.system_prompt, render_template(game.template_text, game.payoffs)};
}

PromptBundle Corpus::render_custom(const std::string& context_id, const std::string& game_id,
                                   const Payoffs& payoffs) const {
  const Context& ctx = context(context_id);
  // any shipped template for this game id works; payoffs come from the caller
  const GamePrompt* game = nullptr;
  for (const auto& g : games_) {
    if (g.game_id == game_id) {
      game = &g;
      break;
    }
  }
  if (!game) throw UnknownScenario("unknown game: " + game_id);
  return PromptBundle{ctx.system_prompt, render_template(game->template_text, payoffs)};
}

}  // namespace dilemma
