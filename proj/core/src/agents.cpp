#include "dilemma/agents.hpp"

#include <cctype>
#include <regex>

#include "dilemma/errors.hpp"
#include "dilemma/prng.hpp"

namespace dilemma {

namespace {

bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

struct FoundToken {
  Action action;
  std::size_t pos;
};

std::vector<FoundToken> standalone_action_tokens(const std::string& raw, bool case_insensitive) {
  std::vector<FoundToken> found;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (case_insensitive) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (c != 'C' && c != 'D') continue;
    const bool left_ok = i == 0 || !is_token_char(raw[i - 1]);
    const bool right_ok = i + 1 == raw.size() || !is_token_char(raw[i + 1]);
    if (left_ok && right_ok) {
      found.push_back({c == 'C' ? Action::Cooperate : Action::Defect, i});
    }
  }
  return found;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

AgentResponse make_action_response(Action a) {
  AgentResponse r;
  r.raw_text = action_name(a);
  r.parsed = a;
  return r;
}

AgentResponse make_contribution_response(const Rat& amount) {
  AgentResponse r;
  r.raw_text = to_display_string(amount);
  r.parsed = to_double(amount);
  return r;
}

double coop_probability_for(const TableAgentSpec& spec, const std::string& key) {
  auto it = spec.coop_prob.find(key);
  if (it == spec.coop_prob.end()) {
    if (!spec.default_prob) {
      throw ConfigError("table agent has no cooperation probability for scenario " + key);
    }
    return *spec.default_prob;
  }
  return it->second;
}

AgentResponse bernoulli_response(double coop_prob, std::uint64_t trial_seed,
                                 const std::optional<PggSpec>& pgg) {
  if (coop_prob < 0.0 || coop_prob > 1.0) {
    throw ConfigError("cooperation probability must lie in [0, 1]");
  }
  SplitMix64 rng(trial_seed);
  const bool coop = rng.uniform01() < coop_prob;
  if (pgg) {
    // convention: cooperation maps to a full contribution, defection to none
    return make_contribution_response(coop ? pgg->endowment : Rat(0));
  }
  return make_action_response(coop ? Action::Cooperate : Action::Defect);
}

Action rational_best_response(const Payoffs& x, const Rat& q) {
  // Expected utility under a coplayer who cooperates with probability q.
  const Rat eu_coop = q * x.r + (Rat(1) - q) * x.s;
  const Rat eu_defect = q * x.t + (Rat(1) - q) * x.p;
  // Indifference resolves toward the socially optimal action.
  return eu_defect > eu_coop ? Action::Defect : Action::Cooperate;
}

}  // namespace

std::string parse_failure_reason_name(ParseFailureReason r) {
  switch (r) {
    case ParseFailureReason::Missing: return "missing";
    case ParseFailureReason::Ambiguous: return "ambiguous";
    case ParseFailureReason::OutOfRange: return "out-of-range";
  }
  return "?";
}

std::string agent_kind(const AgentSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LlmHttpSpec>) return "llm-http";
        if constexpr (std::is_same_v<T, TableAgentSpec>) return "table";
        if constexpr (std::is_same_v<T, FixedAgentSpec>) return "fixed";
        if constexpr (std::is_same_v<T, RationalAgentSpec>) return "rational";
        if constexpr (std::is_same_v<T, MixedNeAgentSpec>) return "mixed-ne";
      },
      spec);
}

std::variant<Action, ParseFailure> parse_action(const std::string& raw,
                                                const ParsePolicy& policy) {
  const auto tokens = standalone_action_tokens(raw, policy.case_insensitive);
  if (tokens.empty()) return ParseFailure{ParseFailureReason::Missing};

  if (policy.final_token_wins) return tokens.back().action;

  bool saw_coop = false;
  bool saw_defect = false;
  for (const auto& t : tokens) {
    (t.action == Action::Cooperate ? saw_coop : saw_defect) = true;
  }
  if (saw_coop && saw_defect) return ParseFailure{ParseFailureReason::Ambiguous};
  return tokens.front().action;
}

std::variant<double, ParseFailure> parse_contribution(const std::string& raw, double endowment) {
  static const std::regex number(R"(-?\d+(?:\.\d+)?)");
  std::smatch m;
  if (!std::regex_search(raw, m, number)) return ParseFailure{ParseFailureReason::Missing};
  const double value = std::stod(m.str());
  if (value < 0.0 || value > endowment) return ParseFailure{ParseFailureReason::OutOfRange};
  return value;
}

const std::string& motivation_request_sentence() {
  static const std::string sentence =
      "Before giving your answer, briefly explain the motivation behind your choice, and end "
      "your reply with a single standalone letter, either \"C\" or \"D\", to denote your "
      "preferred option.";
  return sentence;
}

AgentResponse decide(const AgentSpec& spec, const TrialInput& input, std::uint64_t trial_seed,
                     const ParsePolicy& policy) {
  const auto start = std::chrono::steady_clock::now();
  AgentResponse response = std::visit(
      [&](const auto& s) -> AgentResponse {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FixedAgentSpec>) {
          if (input.pgg) {
            return make_contribution_response(
                s.action == Action::Cooperate ? input.pgg->endowment : Rat(0));
          }
          return make_action_response(s.action);
        } else if constexpr (std::is_same_v<T, TableAgentSpec>) {
          return bernoulli_response(coop_probability_for(s, input.scenario_key), trial_seed,
                                    input.pgg);
        } else if constexpr (std::is_same_v<T, RationalAgentSpec>) {
          if (s.conjecture_q < Rat(0) || s.conjecture_q > Rat(1)) {
            throw ConfigError("conjecture must lie in [0, 1]");
          }
          if (input.pgg) {
            // marginal return m/n < 1 makes zero the dominant contribution
            return make_contribution_response(Rat(0));
          }
          if (!input.payoffs) throw ConfigError("rational agent needs game payoffs");
          return make_action_response(rational_best_response(*input.payoffs, s.conjecture_q));
        } else if constexpr (std::is_same_v<T, MixedNeAgentSpec>) {
          if (input.pgg) return make_contribution_response(Rat(0));
          if (!input.payoffs) throw ConfigError("mixed-ne agent needs game payoffs");
          const EquilibriumProfile eq = equilibria(*input.payoffs);
          if (eq.dominant_action) return make_action_response(*eq.dominant_action);
          return bernoulli_response(to_double(*eq.mixed_coop_prob), trial_seed, std::nullopt);
        } else {
          static_assert(std::is_same_v<T, LlmHttpSpec>);
          return detail::llm_decide(s, input, policy);
        }
      },
      spec);
  const auto end = std::chrono::steady_clock::now();
  if (response.latency_ms == 0) {
    response.latency_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - start)
            .count();
  }
  return response;
}

namespace detail {

// Shared with http_agent.cpp: route raw model text through the right parser
// and extract the motivation when the final-token policy applies.
void finish_llm_response(AgentResponse& response, const TrialInput& input,
                         const ParsePolicy& policy) {
  if (input.pgg) {
    auto parsed = parse_contribution(response.raw_text, to_double(input.pgg->endowment));
    if (std::holds_alternative<double>(parsed)) {
      response.parsed = std::get<double>(parsed);
    } else {
      response.parsed = std::get<ParseFailure>(parsed);
    }
    return;
  }
  auto parsed = parse_action(response.raw_text, policy);
  if (std::holds_alternative<Action>(parsed)) {
    response.parsed = std::get<Action>(parsed);
    if (policy.final_token_wins) {
      const auto tokens = standalone_action_tokens(response.raw_text, policy.case_insensitive);
      const std::string before = trimmed(response.raw_text.substr(0, tokens.back().pos));
      if (!before.empty()) response.motivation = before;
    }
  } else {
    response.parsed = std::get<ParseFailure>(parsed);
  }
}

}  // namespace detail

}  // namespace dilemma
