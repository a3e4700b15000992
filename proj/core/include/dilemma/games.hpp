#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dilemma/errors.hpp"
#include "dilemma/rational.hpp"

namespace dilemma {

/// C is the socially optimal action, D the individually optimal one.
enum class Action { Cooperate, Defect };

char action_letter(Action a);
std::string action_name(Action a);

/// The four symmetric 2x2 dilemma classes induced by the strict orderings of
/// T vs R and P vs S.
enum class GameClass { PrisonersDilemma, Snowdrift, StagHunt, PrisonersDelight };

std::string game_class_name(GameClass g);

/// Payoff quadruple of a symmetric 2x2 game: reward (both cooperate),
/// temptation (defect against a cooperator), sucker's payoff (cooperate
/// against a defector), punishment (both defect).
///
/// Admissibility requires max(p, s) < min(t, r); construction enforces it.
struct Payoffs {
  Rat r;
  Rat t;
  Rat s;
  Rat p;

  static Payoffs make(Rat r, Rat t, Rat s, Rat p);
  static Payoffs make(std::int64_t r, std::int64_t t, std::int64_t s, std::int64_t p);

  bool operator==(const Payoffs&) const = default;
};

using ActionPair = std::pair<Action, Action>;

/// Nash structure of an admissible game with strict orderings. Rationalizable
/// games carry a dominant action and a single pure profile; the coordination
/// and anti-coordination games carry two pure profiles plus the mixed
/// cooperation probability q that makes the coplayer indifferent.
struct EquilibriumProfile {
  std::vector<ActionPair> pure_profiles;
  std::optional<Rat> mixed_coop_prob;
  std::optional<Action> dominant_action;

  bool operator==(const EquilibriumProfile&) const = default;
};

/// The symmetric Pareto-best profile together with the unconstrained joint
/// welfare argmax, which can be asymmetric (e.g. (C,D)/(D,C) in games where
/// t + s > 2r).
struct SocialOptimum {
  ActionPair symmetric_best;
  std::vector<ActionPair> welfare_argmax;
  bool symmetric_is_welfare_max;

  bool operator==(const SocialOptimum&) const = default;
};

/// Linear n-player public good: each player keeps endowment - c_i and the
/// pot multiplier * sum(c) is split evenly. 1 < multiplier < n_players keeps
/// the dilemma (contributing is socially optimal, free-riding individually
/// optimal).
struct PggSpec {
  int n_players = 4;
  Rat endowment = Rat(10);
  Rat multiplier = Rat(8, 5);

  static PggSpec make(int n_players, Rat endowment, Rat multiplier);

  bool operator==(const PggSpec&) const = default;
};

GameClass classify(const Payoffs& payoffs);

/// Payoffs of (mine, theirs) as the pair (my points, coplayer points).
std::pair<Rat, Rat> payoff(const Payoffs& payoffs, Action mine, Action theirs);

Payoffs scale(const Payoffs& payoffs, const Rat& k);

EquilibriumProfile equilibria(const Payoffs& payoffs);

SocialOptimum social_optimum(const Payoffs& payoffs);

std::vector<Rat> pgg_payoffs(const PggSpec& spec, const std::vector<Rat>& contributions);
std::vector<double> pgg_payoffs(const PggSpec& spec, const std::vector<double>& contributions);

}  // namespace dilemma
