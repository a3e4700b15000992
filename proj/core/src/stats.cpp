#include "dilemma/stats.hpp"

#include <cmath>

namespace dilemma {

ProportionSample ProportionSample::make(std::int64_t successes, std::int64_t n) {
  if (n < 1) throw EmptySample("proportion sample needs n >= 1");
  if (successes < 0 || successes > n) {
    throw Error("successes must lie in [0, n]");
  }
  return ProportionSample{successes, n};
}

double coop_ratio(const ProportionSample& sample) {
  if (sample.n < 1) throw EmptySample("cooperation ratio of an empty sample");
  return static_cast<double>(sample.successes) / static_cast<double>(sample.n);
}

std::string stars(double p_value, bool inclusive) {
  auto below = [&](double threshold) {
    return inclusive ? p_value <= threshold : p_value < threshold;
  };
  if (below(0.001)) return "***";
  if (below(0.01)) return "**";
  if (below(0.05)) return "*";
  return "";
}

double normal_upper_tail(double z) {
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

ZTestResult two_prop_ztest(const ProportionSample& a, const ProportionSample& b,
                           const ZTestOptions& options) {
  if (a.n < 1 || b.n < 1) throw EmptySample("two_prop_ztest needs both n >= 1");

  ZTestResult res;
  res.p1 = coop_ratio(a);
  res.p2 = coop_ratio(b);
  res.diff = res.p2 - res.p1;

  const double pooled = static_cast<double>(a.successes + b.successes) /
                        static_cast<double>(a.n + b.n);
  res.se = std::sqrt(pooled * (1.0 - pooled) *
                     (1.0 / static_cast<double>(a.n) + 1.0 / static_cast<double>(b.n)));

  if (pooled == 0.0 || pooled == 1.0) {
    // Every observation agrees in both samples; there is no variation to
    // test against. Identical proportions degrade gracefully.
    if (res.p1 == res.p2) {
      res.z = 0.0;
      res.p_value = options.two_sided ? 1.0 : 0.5;
      res.stars = stars(res.p_value, options.inclusive_stars);
      res.degenerate = true;
      return res;
    }
    throw DegeneratePool("pooled proportion is degenerate but samples differ");
  }

  res.z = (res.p1 - res.p2) / res.se;
  res.p_value = normal_upper_tail(std::abs(res.z));
  if (options.two_sided) res.p_value = std::min(1.0, 2.0 * res.p_value);
  res.stars = stars(res.p_value, options.inclusive_stars);
  return res;
}

std::string improvement_class_name(ImprovementClass c) {
  switch (c) {
    case ImprovementClass::Learning: return "Learning";
    case ImprovementClass::Overcorrection: return "Overcorrection";
    case ImprovementClass::Exacerbation: return "Exacerbation";
    case ImprovementClass::Degenerate: return "Degenerate";
  }
  return "?";
}

ImprovementResult improvement(double teacher, double baseline, double tuned) {
  ImprovementResult res;
  res.teacher = teacher;
  res.baseline = baseline;
  res.tuned = tuned;
  if (teacher == baseline) {
    res.cls = ImprovementClass::Degenerate;
    return res;
  }
  const double value = 1.0 - (teacher - tuned) / (teacher - baseline);
  res.value = value;
  if (value < 0.0) {
    res.cls = ImprovementClass::Exacerbation;
  } else if (value > 1.0) {
    res.cls = ImprovementClass::Overcorrection;
  } else {
    res.cls = ImprovementClass::Learning;
  }
  return res;
}

PggStats pgg_stats(const std::vector<double>& contributions) {
  if (contributions.empty()) throw EmptySample("no contributions");
  PggStats out;
  out.n = contributions.size();
  double sum = 0;
  for (double c : contributions) sum += c;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n == 1) {
    out.se = 0.0;
    out.single_observation = true;
    return out;
  }
  double ss = 0;
  for (double c : contributions) ss += (c - out.mean) * (c - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(out.n - 1));
  out.se = sd / std::sqrt(static_cast<double>(out.n));
  return out;
}

}  // namespace dilemma
