#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "dilemma/corpus.hpp"
#include "dilemma/games.hpp"

namespace dilemma {

/// Action-parsing knobs. The prompt demands a single uppercase letter, so the
/// default accepts standalone uppercase tokens only and fails when both "C"
/// and "D" appear. final_token_wins is used for motivated answers, where the
/// reasoning may mention both letters and the last standalone token decides.
struct ParsePolicy {
  bool case_insensitive = false;
  bool final_token_wins = false;
};

enum class ParseFailureReason { Missing, Ambiguous, OutOfRange };

std::string parse_failure_reason_name(ParseFailureReason r);

struct ParseFailure {
  ParseFailureReason reason = ParseFailureReason::Missing;

  bool operator==(const ParseFailure&) const = default;
};

/// A parsed agent answer: a 2x2 action, a public-good contribution, or a
/// recorded failure.
using Parsed = std::variant<Action, double, ParseFailure>;

struct AgentResponse {
  std::string raw_text;
  Parsed parsed = ParseFailure{};
  std::optional<std::string> motivation;
  double latency_ms = 0;
  int attempt = 1;
};

/// Backoff schedule for transport-level retries (HTTP 429/5xx and transport
/// errors). Distinct from the runner's parse-retry policy.
struct RetryPolicy {
  std::chrono::milliseconds base{1000};
  double factor = 2.0;
  std::chrono::milliseconds cap{60000};
  int max_retries = 5;
};

/// Chat-completions-style HTTP backend. Memoryless: every decide() is an
/// independent request carrying only the scenario's system and user messages.
struct LlmHttpSpec {
  std::string endpoint_url;
  std::string model_name;
  double temperature = 0.8;
  std::optional<int> max_tokens;
  bool ask_motivation = false;
  std::chrono::milliseconds timeout{120000};
  std::string auth_token_env;  // env var holding the bearer token; empty = unauthenticated
  std::map<std::string, double> extra_params;  // e.g. top_p, passed through verbatim
  RetryPolicy retry;
};

/// Scripted cooperation probabilities per scenario key; the optional default
/// applies to keys not listed.
struct TableAgentSpec {
  std::map<std::string, double> coop_prob;
  std::optional<double> default_prob;
};

struct FixedAgentSpec {
  Action action = Action::Cooperate;
};

/// Best-responds to a conjectured coplayer cooperation probability.
struct RationalAgentSpec {
  Rat conjecture_q = Rat(1, 2);
};

/// Samples C with the game's mixed-equilibrium probability; plays the
/// dominant action in rationalizable games.
struct MixedNeAgentSpec {};

using AgentSpec =
    std::variant<LlmHttpSpec, TableAgentSpec, FixedAgentSpec, RationalAgentSpec, MixedNeAgentSpec>;

std::string agent_kind(const AgentSpec& spec);

/// Everything an agent may look at for one trial: the rendered prompts plus
/// the scenario's game parameters (payoffs for 2x2 games, the spec for the
/// public good game). Exactly one of payoffs/pgg is set.
struct TrialInput {
  std::string scenario_key;
  PromptBundle bundle;
  std::optional<Payoffs> payoffs;
  std::optional<PggSpec> pgg;
};

/// Runs one memoryless decision. Baselines are pure functions of
/// (spec, input, trial_seed); the HTTP backend performs a single
/// chat-completions request with transport retries. Raw text is always
/// recorded, including on parse failure.
AgentResponse decide(const AgentSpec& spec, const TrialInput& input, std::uint64_t trial_seed,
                     const ParsePolicy& policy = {});

std::variant<Action, ParseFailure> parse_action(const std::string& raw,
                                                const ParsePolicy& policy = {});

std::variant<double, ParseFailure> parse_contribution(const std::string& raw, double endowment);

/// Sentence appended to the user prompt when ask_motivation is set. A harness
/// convention, recorded in the run manifest.
const std::string& motivation_request_sentence();

namespace detail {
// Implemented in http_agent.cpp.
AgentResponse llm_decide(const LlmHttpSpec& spec, const TrialInput& input,
                         const ParsePolicy& policy);
// Parses raw model text into the response, extracting the motivation when the
// final-token policy applies.
void finish_llm_response(AgentResponse& response, const TrialInput& input,
                         const ParsePolicy& policy);
}  // namespace detail

}  // namespace dilemma
