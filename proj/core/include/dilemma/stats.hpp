#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dilemma/errors.hpp"

namespace dilemma {

struct ProportionSample {
  std::int64_t successes = 0;
  std::int64_t n = 0;

  static ProportionSample make(std::int64_t successes, std::int64_t n);
};

/// successes / n at full precision.
double coop_ratio(const ProportionSample& sample);

/// p < .001 -> "***", p < .01 -> "**", p < .05 -> "*", else "". The inclusive
/// flag widens the comparisons to <= for compatibility with reports that star
/// the threshold itself.
std::string stars(double p_value, bool inclusive = false);

struct ZTestOptions {
  bool two_sided = false;
  bool inclusive_stars = false;
};

/// Pooled two-proportion z-test. Sign conventions: diff = p2 - p1 while z =
/// (p1 - p2) / se, so z is positive when the first sample cooperates more.
/// The default p-value is the one-sided upper tail at |z|.
struct ZTestResult {
  double p1 = 0;
  double p2 = 0;
  double diff = 0;
  double se = 0;
  double z = 0;
  double p_value = 0;
  std::string stars;
  bool degenerate = false;  // pooled proportion was 0 or 1 with equal samples
};

ZTestResult two_prop_ztest(const ProportionSample& a, const ProportionSample& b,
                           const ZTestOptions& options = {});

/// Upper-tail probability of the standard normal, P(Z > z).
double normal_upper_tail(double z);

enum class ImprovementClass { Learning, Overcorrection, Exacerbation, Degenerate };

std::string improvement_class_name(ImprovementClass c);

/// Alignment of a tuned model's cooperation rate with its teacher, normalized
/// by how far apart teacher and untuned student started:
///   value = 1 - (teacher - tuned) / (teacher - baseline).
/// 1 means the tuned model matches the teacher, 0 means no movement, above 1
/// it overshot past the teacher, below 0 it drifted further away.
struct ImprovementResult {
  double teacher = 0;
  double baseline = 0;
  double tuned = 0;
  std::optional<double> value;  // absent iff Degenerate (teacher == baseline)
  ImprovementClass cls = ImprovementClass::Degenerate;
};

ImprovementResult improvement(double teacher, double baseline, double tuned);

struct PggStats {
  double mean = 0;
  double se = 0;  // sample standard deviation / sqrt(n)
  std::size_t n = 0;
  bool single_observation = false;
};

PggStats pgg_stats(const std::vector<double>& contributions);

}  // namespace dilemma
