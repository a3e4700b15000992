#include "dilemma/games.hpp"

#include <algorithm>

namespace dilemma {

char action_letter(Action a) {
  return a == Action::Cooperate ? 'C' : 'D';
}

std::string action_name(Action a) {
  return a == Action::Cooperate ? "C" : "D";
}

std::string game_class_name(GameClass g) {
  switch (g) {
    case GameClass::PrisonersDilemma: return "PrisonersDilemma";
    case GameClass::Snowdrift: return "Snowdrift";
    case GameClass::StagHunt: return "StagHunt";
    case GameClass::PrisonersDelight: return "PrisonersDelight";
  }
  return "?";
}

Payoffs Payoffs::make(Rat r, Rat t, Rat s, Rat p) {
  if (std::max(p, s) >= std::min(t, r)) {
    throw AdmissibilityViolation(
        "inadmissible payoffs: max(p, s) must be smaller than min(t, r)");
  }
  return Payoffs{r, t, s, p};
}

Payoffs Payoffs::make(std::int64_t r, std::int64_t t, std::int64_t s, std::int64_t p) {
  return make(Rat(r), Rat(t), Rat(s), Rat(p));
}

PggSpec PggSpec::make(int n_players, Rat endowment, Rat multiplier) {
  if (n_players < 2) throw ConfigError("public good game needs at least 2 players");
  if (endowment < Rat(0)) throw ConfigError("endowment must be non-negative");
  if (multiplier <= Rat(1) || multiplier >= Rat(n_players)) {
    throw ConfigError("multiplier must satisfy 1 < m < n_players");
  }
  return PggSpec{n_players, endowment, multiplier};
}

GameClass classify(const Payoffs& x) {
  if (std::max(x.p, x.s) >= std::min(x.t, x.r)) {
    throw AdmissibilityViolation(
        "inadmissible payoffs: max(p, s) must be smaller than min(t, r)");
  }
  if (x.t == x.r || x.p == x.s) {
    throw TieError("classification requires strict orderings t != r and p != s");
  }
  if (x.t > x.r) {
    return x.p > x.s ? GameClass::PrisonersDilemma : GameClass::Snowdrift;
  }
  return x.p > x.s ? GameClass::StagHunt : GameClass::PrisonersDelight;
}

std::pair<Rat, Rat> payoff(const Payoffs& x, Action mine, Action theirs) {
  if (mine == Action::Cooperate) {
    return theirs == Action::Cooperate ? std::pair{x.r, x.r} : std::pair{x.s, x.t};
  }
  return theirs == Action::Cooperate ? std::pair{x.t, x.s} : std::pair{x.p, x.p};
}

Payoffs scale(const Payoffs& x, const Rat& k) {
  if (k <= Rat(0)) throw NonPositiveScale("scale factor must be positive");
  return Payoffs{x.r * k, x.t * k, x.s * k, x.p * k};
}

EquilibriumProfile equilibria(const Payoffs& x) {
  const GameClass cls = classify(x);
  EquilibriumProfile eq;
  switch (cls) {
    case GameClass::PrisonersDilemma:
      eq.dominant_action = Action::Defect;
      eq.pure_profiles = {{Action::Defect, Action::Defect}};
      break;
    case GameClass::PrisonersDelight:
      eq.dominant_action = Action::Cooperate;
      eq.pure_profiles = {{Action::Cooperate, Action::Cooperate}};
      break;
    case GameClass::StagHunt:
      eq.pure_profiles = {{Action::Cooperate, Action::Cooperate},
                          {Action::Defect, Action::Defect}};
      break;
    case GameClass::Snowdrift:
      eq.pure_profiles = {{Action::Cooperate, Action::Defect},
                          {Action::Defect, Action::Cooperate}};
      break;
  }
  if (!eq.dominant_action) {
    // q solves the indifference condition q*r + (1-q)*s = q*t + (1-q)*p.
    eq.mixed_coop_prob = (x.p - x.s) / ((x.p - x.s) + (x.r - x.t));
  }
  return eq;
}

SocialOptimum social_optimum(const Payoffs& x) {
  (void)classify(x);  // reject ties and inadmissible input the same way

  const std::vector<ActionPair> profiles = {
      {Action::Cooperate, Action::Cooperate},
      {Action::Cooperate, Action::Defect},
      {Action::Defect, Action::Cooperate},
      {Action::Defect, Action::Defect},
  };

  SocialOptimum out;
  // r > max(p, s) by admissibility, so (C,C) beats (D,D) and is the best
  // symmetric profile.
  out.symmetric_best = {Action::Cooperate, Action::Cooperate};

  Rat best = x.r + x.r;
  for (const auto& pr : profiles) {
    auto [a, b] = payoff(x, pr.first, pr.second);
    best = std::max(best, a + b);
  }
  for (const auto& pr : profiles) {
    auto [a, b] = payoff(x, pr.first, pr.second);
    if (a + b == best) out.welfare_argmax.push_back(pr);
  }
  out.symmetric_is_welfare_max = (x.r + x.r == best);
  return out;
}

namespace {

template <typename T>
std::vector<T> pgg_payoffs_impl(const PggSpec& spec, const std::vector<T>& contributions,
                                const T& zero, const T& endowment, const T& multiplier,
                                const T& n) {
  if (static_cast<int>(contributions.size()) != spec.n_players) {
    throw ArityMismatch("expected one contribution per player");
  }
  T pot = zero;
  for (const T& c : contributions) {
    if (c < zero || c > endowment) {
      throw ContributionOutOfRange("contribution outside [0, endowment]");
    }
    pot += c;
  }
  const T share = pot * multiplier / n;
  std::vector<T> out;
  out.reserve(contributions.size());
  for (const T& c : contributions) out.push_back(endowment - c + share);
  return out;
}

}  // namespace

std::vector<Rat> pgg_payoffs(const PggSpec& spec, const std::vector<Rat>& contributions) {
  return pgg_payoffs_impl<Rat>(spec, contributions, Rat(0), spec.endowment, spec.multiplier,
                               Rat(spec.n_players));
}

std::vector<double> pgg_payoffs(const PggSpec& spec, const std::vector<double>& contributions) {
  return pgg_payoffs_impl<double>(spec, contributions, 0.0, to_double(spec.endowment),
                                  to_double(spec.multiplier),
                                  static_cast<double>(spec.n_players));
}

}  // namespace dilemma
