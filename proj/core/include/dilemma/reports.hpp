#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dilemma/aggregate.hpp"
#include "dilemma/stats.hpp"

namespace dilemma {

/// Which trial count the cooperation ratio is divided by: parsed trials only
/// (the default), or all initializations including invalid ones.
enum class Denominator { OkTrials, AllTrials };

enum class GroupBy { Scenario, Game, Context };

std::string group_by_name(GroupBy g);
GroupBy parse_group_by(const std::string& name);

/// One scenario row of a normal-vs-doubled comparison report.
struct ComparisonRow {
  std::string scenario;
  double normal_ratio = 0;
  double oos_ratio = 0;
  double diff = 0;
  double se = 0;
  double z = 0;
  double p_value = 0;
  std::string stars;
};

/// Scenario rows plus unweighted AVERAGE and MEDIAN rows over every numeric
/// column. Rows are matched between the two logs by base scenario key, i.e.
/// "team_prison" pairs with "team_prison_x2".
struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  ComparisonRow average;
  ComparisonRow median;
};

ComparisonReport ztest_report(const AggregateMap& normal, const AggregateMap& oos,
                              Denominator denom = Denominator::OkTrials,
                              const ZTestOptions& options = {});

std::string comparison_to_csv(const ComparisonReport& report);
std::string comparison_to_markdown(const ComparisonReport& report);
std::string comparison_to_json(const ComparisonReport& report);

struct ImprovementRow {
  std::string label;
  double teacher = 0;
  double baseline = 0;
  double tuned = 0;
  std::optional<double> value;
  std::string cls;
};

/// Improvement per group, computed from pooled cooperation counts of the
/// three logs, with the unweighted mean of defined values as the marker line.
struct ImprovementReport {
  GroupBy group_by = GroupBy::Scenario;
  std::vector<ImprovementRow> rows;
  std::optional<double> average;
  bool percent = false;
};

ImprovementReport improvement_report(const AggregateMap& teacher, const AggregateMap& baseline,
                                     const AggregateMap& tuned, GroupBy group_by,
                                     Denominator denom = Denominator::OkTrials);

std::string improvement_to_csv(const ImprovementReport& report);
std::string improvement_to_markdown(const ImprovementReport& report);
std::string improvement_to_json(const ImprovementReport& report);

/// Cooperation-rate bars with binomial standard errors, grouped by game or
/// context, as plot-ready data.
struct CoopBar {
  std::string label;
  double coop_rate = 0;
  double se = 0;
  std::int64_t n_ok = 0;
};

struct CoopReport {
  GroupBy group_by = GroupBy::Game;
  std::vector<CoopBar> bars;
};

CoopReport coop_report(const AggregateMap& agg, GroupBy group_by,
                       Denominator denom = Denominator::OkTrials);

std::string coop_to_csv(const CoopReport& report);
std::string coop_to_json(const CoopReport& report);

/// Group label of a scenario key under the given grouping ("team_prison_x2"
/// -> game "prison", context "team").
std::string group_label(const std::string& scenario_key, GroupBy group_by);

}  // namespace dilemma
