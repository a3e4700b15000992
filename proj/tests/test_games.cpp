#include "dilemma/games.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"

using namespace dilemma;

namespace {

// The four point matrices shipped with the corpus.
const Payoffs kPrison = Payoffs::make(5, 10, 2, 3);
const Payoffs kDelight = Payoffs::make(10, 5, 3, 2);
const Payoffs kStagHunt = Payoffs::make(10, 5, 2, 3);
const Payoffs kSnowdrift = Payoffs::make(5, 10, 3, 2);

std::vector<ActionPair> sorted(std::vector<ActionPair> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("games");

TEST_CASE("classify maps the shipped matrices to their classes") {
  CHECK(classify(kPrison) == GameClass::PrisonersDilemma);
  CHECK(classify(kDelight) == GameClass::PrisonersDelight);
  CHECK(classify(kStagHunt) == GameClass::StagHunt);
  CHECK(classify(kSnowdrift) == GameClass::Snowdrift);
}

TEST_CASE("classify rejects ties and inadmissible payoffs") {
  CHECK_THROWS_AS(classify(Payoffs{Rat(5), Rat(5), Rat(2), Rat(3)}), TieError);
  CHECK_THROWS_AS(classify(Payoffs{Rat(5), Rat(10), Rat(2), Rat(2)}), TieError);
  CHECK_THROWS_AS(classify(Payoffs{Rat(5), Rat(10), Rat(2), Rat(7)}), AdmissibilityViolation);
  CHECK_THROWS_AS(Payoffs::make(5, 10, 2, 7), AdmissibilityViolation);
  CHECK_THROWS_AS(Payoffs::make(2, 3, 4, 5), AdmissibilityViolation);
}

TEST_CASE("payoff pairs follow the game table") {
  CHECK(payoff(kDelight, Action::Cooperate, Action::Cooperate) == std::pair{Rat(10), Rat(10)});
  CHECK(payoff(kPrison, Action::Cooperate, Action::Defect) == std::pair{Rat(2), Rat(10)});
  CHECK(payoff(kPrison, Action::Defect, Action::Cooperate) == std::pair{Rat(10), Rat(2)});
  CHECK(payoff(kPrison, Action::Defect, Action::Defect) == std::pair{Rat(3), Rat(3)});
}

TEST_CASE("payoff is symmetric under swapping the players") {
  std::mt19937_64 rng(2024);
  const Action actions[] = {Action::Cooperate, Action::Defect};
  for (int i = 0; i < 200; ++i) {
    const Payoffs x = oracle::random_admissible(rng);
    for (Action a : actions) {
      for (Action b : actions) {
        const auto ab = payoff(x, a, b);
        const auto ba = payoff(x, b, a);
        CHECK(ab.first == ba.second);
        CHECK(ab.second == ba.first);
      }
    }
  }
}

TEST_CASE("scale multiplies every entry and keeps admissibility") {
  const Payoffs doubled = scale(kPrison, Rat(2));
  CHECK(doubled == Payoffs::make(10, 20, 4, 6));
  CHECK(scale(kStagHunt, Rat(2)) == Payoffs::make(20, 10, 4, 6));
  CHECK(scale(kSnowdrift, Rat(1)) == kSnowdrift);
  CHECK_THROWS_AS(scale(kPrison, Rat(0)), NonPositiveScale);
  CHECK_THROWS_AS(scale(kPrison, Rat(-2)), NonPositiveScale);
}

TEST_CASE("classification and equilibria are invariant under positive scaling") {
  std::mt19937_64 rng(7);
  const Rat factors[] = {Rat(1, 2), Rat(2), Rat(10), Rat(7, 3)};
  for (int i = 0; i < 300; ++i) {
    const Payoffs x = oracle::random_admissible(rng);
    for (const Rat& k : factors) {
      const Payoffs y = scale(x, k);
      CHECK(classify(y) == classify(x));
      CHECK(equilibria(y) == equilibria(x));
    }
  }
}

TEST_CASE("equilibria of the shipped matrices") {
  const EquilibriumProfile pd = equilibria(kPrison);
  CHECK(pd.dominant_action == Action::Defect);
  CHECK(pd.pure_profiles == std::vector<ActionPair>{{Action::Defect, Action::Defect}});
  CHECK_FALSE(pd.mixed_coop_prob.has_value());

  const EquilibriumProfile delight = equilibria(kDelight);
  CHECK(delight.dominant_action == Action::Cooperate);
  CHECK(delight.pure_profiles ==
        std::vector<ActionPair>{{Action::Cooperate, Action::Cooperate}});
  CHECK_FALSE(delight.mixed_coop_prob.has_value());

  // frozen from the grid-sweep oracle below: both mixed probabilities are 1/6
  const EquilibriumProfile sh = equilibria(kStagHunt);
  CHECK_FALSE(sh.dominant_action.has_value());
  CHECK(sorted(sh.pure_profiles) ==
        sorted({{Action::Cooperate, Action::Cooperate}, {Action::Defect, Action::Defect}}));
  REQUIRE(sh.mixed_coop_prob.has_value());
  CHECK(*sh.mixed_coop_prob == Rat(1, 6));

  const EquilibriumProfile sd = equilibria(kSnowdrift);
  CHECK_FALSE(sd.dominant_action.has_value());
  CHECK(sorted(sd.pure_profiles) ==
        sorted({{Action::Cooperate, Action::Defect}, {Action::Defect, Action::Cooperate}}));
  REQUIRE(sd.mixed_coop_prob.has_value());
  CHECK(*sd.mixed_coop_prob == Rat(1, 6));
}

TEST_CASE("mixed q agrees with a 1e-6 grid sweep of the payoff crossing") {
  for (const Payoffs& x : {kStagHunt, kSnowdrift}) {
    const auto swept = oracle::mixed_q_gridsweep(x);
    REQUIRE(swept.has_value());
    const auto eq = equilibria(x);
    REQUIRE(eq.mixed_coop_prob.has_value());
    CHECK(std::abs(to_double(*eq.mixed_coop_prob) - *swept) < 1e-6);
  }
  // rationalizable games have no crossing inside (0,1)
  CHECK_FALSE(oracle::mixed_q_gridsweep(kPrison).has_value());
  CHECK_FALSE(oracle::mixed_q_gridsweep(kDelight).has_value());
}

TEST_CASE("equilibria agree with brute-force best-response enumeration") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    const Payoffs x = oracle::random_admissible(rng);
    const EquilibriumProfile eq = equilibria(x);
    CHECK(sorted(eq.pure_profiles) == sorted(oracle::pure_nash_bruteforce(x)));
    CHECK(eq.dominant_action == oracle::dominant_bruteforce(x));
    if (eq.mixed_coop_prob) {
      const double q = to_double(*eq.mixed_coop_prob);
      CHECK(q > 0.0);
      CHECK(q < 1.0);
      // indifference: both actions earn the same against the mixed coplayer
      CHECK(std::abs(oracle::eu_cooperate(x, q) - oracle::eu_defect(x, q)) < 1e-9);
    }
  }
}

TEST_CASE("social optimum separates the symmetric choice from the welfare argmax") {
  const SocialOptimum pd = social_optimum(kPrison);
  CHECK(pd.symmetric_best == ActionPair{Action::Cooperate, Action::Cooperate});
  CHECK(sorted(pd.welfare_argmax) ==
        sorted({{Action::Cooperate, Action::Defect}, {Action::Defect, Action::Cooperate}}));
  CHECK_FALSE(pd.symmetric_is_welfare_max);  // 2r = 10 < t + s = 12

  const SocialOptimum delight = social_optimum(kDelight);
  CHECK(delight.symmetric_best == ActionPair{Action::Cooperate, Action::Cooperate});
  CHECK(delight.welfare_argmax ==
        std::vector<ActionPair>{{Action::Cooperate, Action::Cooperate}});
  CHECK(delight.symmetric_is_welfare_max);
}

TEST_CASE("symmetric optimum is mutual cooperation for any admissible game") {
  std::mt19937_64 rng(123);
  for (int i = 0; i < 500; ++i) {
    const Payoffs x = oracle::random_admissible(rng);
    const SocialOptimum opt = social_optimum(x);
    CHECK(opt.symmetric_best == ActionPair{Action::Cooperate, Action::Cooperate});
    // the welfare argmax matches 4-profile enumeration
    Rat best(-1000000);
    for (Action a : {Action::Cooperate, Action::Defect}) {
      for (Action b : {Action::Cooperate, Action::Defect}) {
        best = std::max(best, oracle::my_payoff(x, a, b) + oracle::my_payoff(x, b, a));
      }
    }
    for (const auto& pr : opt.welfare_argmax) {
      CHECK(oracle::my_payoff(x, pr.first, pr.second) +
                oracle::my_payoff(x, pr.second, pr.first) ==
            best);
    }
    CHECK(opt.symmetric_is_welfare_max == (x.r + x.r == best));
  }
}

TEST_CASE("public good payoffs: fixtures") {
  const PggSpec spec = PggSpec::make(4, Rat(10), Rat(8, 5));

  SUBCASE("full contribution") {
    const auto out = pgg_payoffs(spec, std::vector<Rat>(4, Rat(10)));
    for (const Rat& v : out) CHECK(v == Rat(16));
  }
  SUBCASE("no contribution") {
    const auto out = pgg_payoffs(spec, std::vector<Rat>(4, Rat(0)));
    for (const Rat& v : out) CHECK(v == Rat(10));
  }
  SUBCASE("lone contributor") {
    const auto out = pgg_payoffs(spec, {Rat(10), Rat(0), Rat(0), Rat(0)});
    CHECK(out == std::vector<Rat>{Rat(4), Rat(14), Rat(14), Rat(14)});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(pgg_payoffs(spec, std::vector<Rat>(3, Rat(1))), ArityMismatch);
    CHECK_THROWS_AS(pgg_payoffs(spec, {Rat(11), Rat(0), Rat(0), Rat(0)}),
                    ContributionOutOfRange);
    CHECK_THROWS_AS(pgg_payoffs(spec, {Rat(-1), Rat(0), Rat(0), Rat(0)}),
                    ContributionOutOfRange);
  }
  SUBCASE("spec validation") {
    CHECK_THROWS_AS(PggSpec::make(1, Rat(10), Rat(2)), ConfigError);
    CHECK_THROWS_AS(PggSpec::make(4, Rat(10), Rat(1)), ConfigError);
    CHECK_THROWS_AS(PggSpec::make(4, Rat(10), Rat(4)), ConfigError);
    CHECK_THROWS_AS(PggSpec::make(4, Rat(-1), Rat(2)), ConfigError);
  }
}

TEST_CASE("public good payoffs: conservation and incentives") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 400; ++i) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const Rat endowment(1 + static_cast<std::int64_t>(rng() % 20));
    // 1 < m < n with denominator 4
    const Rat multiplier = Rat(1) + Rat(1 + static_cast<std::int64_t>(rng() %
                                            static_cast<std::uint64_t>(4 * (n - 1) - 1)),
                                        4);
    const PggSpec spec = PggSpec::make(n, endowment, multiplier);

    std::vector<Rat> contributions;
    contributions.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      contributions.push_back(endowment * Rat(static_cast<std::int64_t>(rng() % 5), 4));
    }
    const auto out = pgg_payoffs(spec, contributions);

    // exact conservation: sum payoffs = n*e + (m-1)*sum c
    Rat total(0), pot(0);
    for (const Rat& v : out) total += v;
    for (const Rat& c : contributions) pot += c;
    CHECK(total == Rat(n) * endowment + (multiplier - Rat(1)) * pot);

    // free riding: cutting one contribution strictly raises that payoff
    std::size_t who = rng() % static_cast<std::uint64_t>(n);
    if (contributions[who] > Rat(0)) {
      auto reduced = contributions;
      reduced[who] = Rat(0);
      CHECK(pgg_payoffs(spec, reduced)[who] > out[who]);
    }

    // lifting everyone equally helps everyone
    const Rat headroom = endowment - *std::max_element(contributions.begin(), contributions.end());
    if (headroom > Rat(0)) {
      auto lifted = contributions;
      for (Rat& c : lifted) c += headroom;
      const auto lifted_out = pgg_payoffs(spec, lifted);
      for (int j = 0; j < n; ++j) {
        CHECK(lifted_out[static_cast<std::size_t>(j)] > out[static_cast<std::size_t>(j)]);
      }
    }
  }
}

TEST_CASE("double-precision public good payoffs track the exact ones") {
  const PggSpec spec = PggSpec::make(4, Rat(10), Rat(8, 5));
  const auto exact = pgg_payoffs(spec, {Rat(10), Rat(5), Rat(0), Rat(5, 2)});
  const auto approx = pgg_payoffs(spec, std::vector<double>{10.0, 5.0, 0.0, 2.5});
  REQUIRE(exact.size() == approx.size());
  for (std::size_t i = 0; i < exact.size(); ++i) {
    CHECK(approx[i] == doctest::Approx(to_double(exact[i])).epsilon(1e-12));
  }
}

TEST_SUITE_END();
