#include "support/mock_llm.hpp"  // first: pins the httplib build configuration

#include "dilemma/agents.hpp"

#include <doctest.h>

#include <cstdlib>
#include <random>
#include <variant>

#include "dilemma/prng.hpp"
#include "support/oracles.hpp"

using namespace dilemma;

namespace {

const Payoffs kPrison = Payoffs::make(5, 10, 2, 3);
const Payoffs kDelight = Payoffs::make(10, 5, 3, 2);
const Payoffs kSnowdrift = Payoffs::make(5, 10, 3, 2);

TrialInput game_input(const std::string& key, const Payoffs& payoffs) {
  TrialInput input;
  input.scenario_key = key;
  input.bundle = {"system text", "user text"};
  input.payoffs = payoffs;
  return input;
}

TrialInput pgg_input() {
  TrialInput input;
  input.scenario_key = "pgg";
  const PggSpec spec = PggSpec::make(4, Rat(10), Rat(8, 5));
  input.bundle = pgg_scenario(spec);
  input.pgg = spec;
  return input;
}

Action parsed_action(const AgentResponse& r) {
  REQUIRE(std::holds_alternative<Action>(r.parsed));
  return std::get<Action>(r.parsed);
}

}  // namespace

TEST_SUITE_BEGIN("agents");

TEST_CASE("action parsing accepts exactly one standalone uppercase token") {
  auto action_of = [](const std::string& raw) {
    const auto parsed = parse_action(raw);
    REQUIRE(std::holds_alternative<Action>(parsed));
    return std::get<Action>(parsed);
  };
  auto failure_of = [](const std::string& raw, const ParsePolicy& policy = {}) {
    const auto parsed = parse_action(raw, policy);
    REQUIRE(std::holds_alternative<ParseFailure>(parsed));
    return std::get<ParseFailure>(parsed).reason;
  };

  CHECK(action_of("C") == Action::Cooperate);
  CHECK(action_of("D") == Action::Defect);
  CHECK(action_of("My answer: \"D\".") == Action::Defect);
  CHECK(action_of(" C\n") == Action::Cooperate);
  CHECK(action_of("(C)") == Action::Cooperate);
  CHECK(action_of("C C C") == Action::Cooperate);  // one distinct letter

  CHECK(failure_of("I would pick C, though D is tempting.") == ParseFailureReason::Ambiguous);
  CHECK(failure_of("cooperate") == ParseFailureReason::Missing);
  CHECK(failure_of("") == ParseFailureReason::Missing);
  CHECK(failure_of("ACDC") == ParseFailureReason::Missing);  // embedded letters don't count
  CHECK(failure_of("c") == ParseFailureReason::Missing);     // lowercase is rejected by default

  ParsePolicy relaxed;
  relaxed.case_insensitive = true;
  CHECK(std::get<Action>(parse_action("c", relaxed)) == Action::Cooperate);
  CHECK(failure_of("c or d", relaxed) == ParseFailureReason::Ambiguous);

  ParsePolicy final_token;
  final_token.final_token_wins = true;
  CHECK(std::get<Action>(parse_action("C is nice but I pick D", final_token)) ==
        Action::Defect);
  CHECK(failure_of("nothing here", final_token) == ParseFailureReason::Missing);
}

TEST_CASE("round-trip: a rendered action always parses back") {
  for (Action a : {Action::Cooperate, Action::Defect}) {
    const auto parsed = parse_action(action_name(a));
    REQUIRE(std::holds_alternative<Action>(parsed));
    CHECK(std::get<Action>(parsed) == a);
  }
}

TEST_CASE("contribution parsing takes the first in-range numeral") {
  CHECK(std::get<double>(parse_contribution("I contribute 7 points", 10)) == 7.0);
  CHECK(std::get<double>(parse_contribution("2.5", 10)) == 2.5);
  CHECK(std::get<double>(parse_contribution("0", 10)) == 0.0);
  CHECK(std::get<ParseFailure>(parse_contribution("15", 10)).reason ==
        ParseFailureReason::OutOfRange);
  CHECK(std::get<ParseFailure>(parse_contribution("-3", 10)).reason ==
        ParseFailureReason::OutOfRange);
  CHECK(std::get<ParseFailure>(parse_contribution("all of it", 10)).reason ==
        ParseFailureReason::Missing);
}

TEST_CASE("fixed agent") {
  const auto c = decide(FixedAgentSpec{Action::Cooperate}, game_input("biz_prison", kPrison), 1);
  CHECK(parsed_action(c) == Action::Cooperate);
  CHECK(c.raw_text == "C");

  // contribution scenarios map C to the full endowment, D to zero
  const auto full = decide(FixedAgentSpec{Action::Cooperate}, pgg_input(), 1);
  CHECK(std::get<double>(full.parsed) == 10.0);
  const auto none = decide(FixedAgentSpec{Action::Defect}, pgg_input(), 1);
  CHECK(std::get<double>(none.parsed) == 0.0);
}

TEST_CASE("table agent follows its scripted probability") {
  TableAgentSpec spec;
  spec.coop_prob["biz_prison"] = 1.0;
  const auto r = decide(spec, game_input("biz_prison", kPrison), 7);
  CHECK(parsed_action(r) == Action::Cooperate);

  // missing key without a default is a configuration error
  CHECK_THROWS_AS(decide(spec, game_input("team_prison", kPrison), 7), ConfigError);

  spec.default_prob = 0.0;
  CHECK(parsed_action(decide(spec, game_input("team_prison", kPrison), 7)) == Action::Defect);

  // frequency over n = 300 seeded trials stays within 3 sigma of p
  spec.coop_prob["biz_prison"] = 0.75;
  int coop = 0;
  for (int i = 0; i < 300; ++i) {
    const auto seed = derive_trial_seed(2025, "biz_prison", static_cast<std::uint64_t>(i), 1);
    if (parsed_action(decide(spec, game_input("biz_prison", kPrison), seed)) ==
        Action::Cooperate) {
      ++coop;
    }
  }
  const double freq = coop / 300.0;
  CHECK(std::abs(freq - 0.75) <= 3 * std::sqrt(0.75 * 0.25 / 300));
}

TEST_CASE("decide is a pure function of spec, input and seed") {
  TableAgentSpec spec;
  spec.default_prob = 0.42;
  const TrialInput input = game_input("team_snowdrift", kSnowdrift);
  for (std::uint64_t seed : {1ULL, 99ULL, 12345ULL}) {
    const auto a = decide(spec, input, seed);
    const auto b = decide(spec, input, seed);
    CHECK(a.raw_text == b.raw_text);
    CHECK(parsed_action(a) == parsed_action(b));
  }
}

TEST_CASE("rational agent best-responds to its conjecture") {
  // snowdrift at q = 1/2: EU(C) = 4 < EU(D) = 6, so defect
  const auto sd = decide(RationalAgentSpec{Rat(1, 2)},
                         game_input("team_snowdrift", kSnowdrift), 3);
  CHECK(parsed_action(sd) == Action::Defect);
  // delight at q = 1/2: EU(C) = 6.5 > EU(D) = 3.5
  const auto delight =
      decide(RationalAgentSpec{Rat(1, 2)}, game_input("team_delight", kDelight), 3);
  CHECK(parsed_action(delight) == Action::Cooperate);

  // dominant action for every conjecture in rationalizable games
  for (int i = 0; i <= 10; ++i) {
    const Rat q(i, 10);
    CHECK(parsed_action(decide(RationalAgentSpec{q}, game_input("x_prison", kPrison), 1)) ==
          Action::Defect);
    CHECK(parsed_action(decide(RationalAgentSpec{q}, game_input("x_delight", kDelight), 1)) ==
          Action::Cooperate);
  }

  // agreement with brute-force expected utilities on random games
  std::mt19937_64 rng(77);
  for (int i = 0; i < 500; ++i) {
    const Payoffs x = oracle::random_admissible(rng);
    const Rat q(static_cast<std::int64_t>(rng() % 101), 100);
    const Action got =
        parsed_action(decide(RationalAgentSpec{q}, game_input("k", x), 1));
    const double qd = to_double(q);
    const double eu_c = oracle::eu_cooperate(x, qd);
    const double eu_d = oracle::eu_defect(x, qd);
    if (eu_c > eu_d + 1e-12) CHECK(got == Action::Cooperate);
    if (eu_d > eu_c + 1e-12) CHECK(got == Action::Defect);
  }

  // free rides in the public good game
  CHECK(std::get<double>(decide(RationalAgentSpec{Rat(1, 2)}, pgg_input(), 1).parsed) == 0.0);
}

TEST_CASE("mixed-equilibrium agent") {
  // rationalizable games: always the dominant action
  CHECK(parsed_action(decide(MixedNeAgentSpec{}, game_input("x_prison", kPrison), 5)) ==
        Action::Defect);
  CHECK(parsed_action(decide(MixedNeAgentSpec{}, game_input("x_delight", kDelight), 5)) ==
        Action::Cooperate);

  // snowdrift: long-run cooperation frequency near q = 1/6
  int coop = 0;
  const int n = 3000;
  for (int i = 0; i < n; ++i) {
    const auto seed = derive_trial_seed(11, "snow", static_cast<std::uint64_t>(i), 1);
    if (parsed_action(decide(MixedNeAgentSpec{}, game_input("snow", kSnowdrift), seed)) ==
        Action::Cooperate) {
      ++coop;
    }
  }
  const double q = 1.0 / 6.0;
  CHECK(std::abs(coop / static_cast<double>(n) - q) <= 3 * std::sqrt(q * (1 - q) / n));
}

TEST_CASE("seed derivation is stable and order-free") {
  const auto a = derive_trial_seed(1, "biz_prison", 0, 1);
  CHECK(a == derive_trial_seed(1, "biz_prison", 0, 1));
  CHECK(a != derive_trial_seed(1, "biz_prison", 0, 2));
  CHECK(a != derive_trial_seed(1, "biz_prison", 1, 1));
  CHECK(a != derive_trial_seed(2, "biz_prison", 0, 1));
  CHECK(a != derive_trial_seed(1, "biz_delight", 0, 1));
}

TEST_CASE("http agent performs a chat-completions request") {
  TrialInput input = game_input("biz_prison", kPrison);
  input.bundle = {"be a ceo", "pick C or D"};

  testutil::MockLlmServer server([&](const nlohmann::json& request, int) {
    CHECK(request.at("model") == "test-model");
    CHECK(request.at("temperature") == doctest::Approx(0.8));
    CHECK(request.at("max_tokens") == 64);
    const auto& messages = request.at("messages");
    CHECK(messages.size() == 2);
    CHECK(messages[0].at("role") == "system");
    CHECK(messages[0].at("content") == "be a ceo");
    CHECK(messages[1].at("role") == "user");
    CHECK(messages[1].at("content") == "pick C or D");
    return testutil::MockReply{200, "I will go with \"C\"."};
  });

  LlmHttpSpec spec;
  spec.endpoint_url = server.url();
  spec.model_name = "test-model";
  spec.max_tokens = 64;
  const auto response = decide(spec, input, 1);
  CHECK(parsed_action(response) == Action::Cooperate);
  CHECK(response.raw_text == "I will go with \"C\".");
  CHECK(server.calls() == 1);
  CHECK(response.latency_ms > 0);
}

TEST_CASE("http agent sends the bearer token from the environment") {
  setenv("DILEMMA_TEST_TOKEN", "sekrit", 1);
  testutil::MockLlmServer server(
      [](const nlohmann::json&, int) { return testutil::MockReply{200, "D"}; });
  LlmHttpSpec spec;
  spec.endpoint_url = server.url();
  spec.auth_token_env = "DILEMMA_TEST_TOKEN";
  (void)decide(spec, game_input("k", kPrison), 1);
  CHECK(server.last_auth() == "Bearer sekrit");
  unsetenv("DILEMMA_TEST_TOKEN");
}

TEST_CASE("http agent retries 429 and 5xx with backoff") {
  testutil::MockLlmServer server([](const nlohmann::json&, int call) {
    if (call == 1) return testutil::MockReply{429, "slow down"};
    if (call == 2) return testutil::MockReply{503, "busy"};
    return testutil::MockReply{200, "D"};
  });
  LlmHttpSpec spec;
  spec.endpoint_url = server.url();
  spec.retry.base = std::chrono::milliseconds(5);
  const auto response = decide(spec, game_input("k", kPrison), 1);
  CHECK(parsed_action(response) == Action::Defect);
  CHECK(server.calls() == 3);
}

TEST_CASE("http agent surfaces terminal failures") {
  SUBCASE("hard 4xx is not retried") {
    testutil::MockLlmServer server(
        [](const nlohmann::json&, int) { return testutil::MockReply{401, "who are you"}; });
    LlmHttpSpec spec;
    spec.endpoint_url = server.url();
    spec.retry.base = std::chrono::milliseconds(1);
    CHECK_THROWS_AS(decide(spec, game_input("k", kPrison), 1), HttpError);
    CHECK(server.calls() == 1);
  }
  SUBCASE("retry budget exhausts on persistent 5xx") {
    testutil::MockLlmServer server(
        [](const nlohmann::json&, int) { return testutil::MockReply{500, "down"}; });
    LlmHttpSpec spec;
    spec.endpoint_url = server.url();
    spec.retry.base = std::chrono::milliseconds(1);
    spec.retry.max_retries = 2;
    CHECK_THROWS_AS(decide(spec, game_input("k", kPrison), 1), HttpError);
    CHECK(server.calls() == 3);
  }
  SUBCASE("unreachable endpoint") {
    LlmHttpSpec spec;
    spec.endpoint_url = "http://127.0.0.1:1";  // nothing listens there
    spec.retry.base = std::chrono::milliseconds(1);
    spec.retry.max_retries = 1;
    CHECK_THROWS_AS(decide(spec, game_input("k", kPrison), 1), Error);
  }
}

TEST_CASE("ask_motivation appends the request and extracts the motivation") {
  std::string seen_user;
  testutil::MockLlmServer server([&](const nlohmann::json& request, int) {
    seen_user = request.at("messages")[1].at("content").get<std::string>();
    return testutil::MockReply{200, "Cooperation builds trust with my counterpart. C"};
  });
  LlmHttpSpec spec;
  spec.endpoint_url = server.url();
  spec.ask_motivation = true;
  const auto response = decide(spec, game_input("k", kPrison), 1);

  CHECK(seen_user == "user text\n\n" + motivation_request_sentence());
  CHECK(parsed_action(response) == Action::Cooperate);
  REQUIRE(response.motivation.has_value());
  CHECK(*response.motivation == "Cooperation builds trust with my counterpart.");
}

TEST_CASE("http agent parses contributions on the public good scenario") {
  testutil::MockLlmServer server(
      [](const nlohmann::json&, int) { return testutil::MockReply{200, "I chip in 6 points"}; });
  LlmHttpSpec spec;
  spec.endpoint_url = server.url();
  const auto response = decide(spec, pgg_input(), 1);
  CHECK(std::get<double>(response.parsed) == 6.0);

  testutil::MockLlmServer over(
      [](const nlohmann::json&, int) { return testutil::MockReply{200, "20"}; });
  spec.endpoint_url = over.url();
  const auto bad = decide(spec, pgg_input(), 1);
  CHECK(std::get<ParseFailure>(bad.parsed).reason == ParseFailureReason::OutOfRange);
}

TEST_SUITE_END();
