#include "dilemma/reports.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dilemma/corpus.hpp"

namespace dilemma {

using nlohmann::json;

namespace {

constexpr const char* kComparisonColumns[] = {
    "Scenario", "Normal C ratio", "OoS C ratio", "Difference", "SE", "z-score", "p-value",
};

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  // avoid the "-0.00" artifact
  if (std::string(buf) == "-0.00") return "0.00";
  return buf;
}

std::int64_t denom_of(const ScenarioCounts& c, Denominator d) {
  return d == Denominator::OkTrials ? c.n_ok : c.n_total();
}

ProportionSample sample_of(const ScenarioCounts& c, Denominator d) {
  return ProportionSample::make(c.n_coop, denom_of(c, d));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ComparisonRow summary_row(const std::string& label, const std::vector<ComparisonRow>& rows,
                          bool use_median, const ZTestOptions& options) {
  auto pick = [&](auto getter) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(getter(r));
    if (use_median) return median(std::move(v));
    double sum = 0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
  };
  ComparisonRow out;
  out.scenario = label;
  out.normal_ratio = pick([](const ComparisonRow& r) { return r.normal_ratio; });
  out.oos_ratio = pick([](const ComparisonRow& r) { return r.oos_ratio; });
  out.diff = pick([](const ComparisonRow& r) { return r.diff; });
  out.se = pick([](const ComparisonRow& r) { return r.se; });
  out.z = pick([](const ComparisonRow& r) { return r.z; });
  out.p_value = pick([](const ComparisonRow& r) { return r.p_value; });
  out.stars = stars(out.p_value, options.inclusive_stars);
  return out;
}

json comparison_row_json(const ComparisonRow& r) {
  return json{{"scenario", r.scenario},   {"normal_c_ratio", r.normal_ratio},
              {"oos_c_ratio", r.oos_ratio}, {"difference", r.diff},
              {"se", r.se},               {"z_score", r.z},
              {"p_value", r.p_value},     {"stars", r.stars}};
}

void append_comparison_csv_row(std::ostringstream& out, const ComparisonRow& r) {
  out << r.scenario << ',' << fmt2(r.normal_ratio) << ',' << fmt2(r.oos_ratio) << ','
      << fmt2(r.diff) << ',' << fmt2(r.se) << ',' << fmt2(r.z) << ','
      << fmt2(r.p_value) << r.stars << '\n';
}

void append_comparison_md_row(std::ostringstream& out, const ComparisonRow& r) {
  out << "| " << r.scenario << " | " << fmt2(r.normal_ratio) << " | " << fmt2(r.oos_ratio)
      << " | " << fmt2(r.diff) << " | " << fmt2(r.se) << " | " << fmt2(r.z) << " | "
      << fmt2(r.p_value) << r.stars << " |\n";
}

}  // namespace

std::string group_by_name(GroupBy g) {
  switch (g) {
    case GroupBy::Scenario: return "scenario";
    case GroupBy::Game: return "game";
    case GroupBy::Context: return "context";
  }
  return "?";
}

GroupBy parse_group_by(const std::string& name) {
  if (name == "scenario") return GroupBy::Scenario;
  if (name == "game") return GroupBy::Game;
  if (name == "context") return GroupBy::Context;
  throw ConfigError("unknown grouping: " + name + " (want scenario|game|context)");
}

std::string group_label(const std::string& scenario_key, GroupBy group_by) {
  if (group_by == GroupBy::Scenario) return scenario_key;
  const std::string base = base_scenario_key(scenario_key);
  const auto sep = base.find('_');
  if (sep == std::string::npos) return base;  // e.g. "pgg"
  return group_by == GroupBy::Context ? base.substr(0, sep) : base.substr(sep + 1);
}

ComparisonReport ztest_report(const AggregateMap& normal, const AggregateMap& oos,
                              Denominator denom, const ZTestOptions& options) {
  std::map<std::string, const ScenarioCounts*> normal_by_base;
  std::map<std::string, const ScenarioCounts*> oos_by_base;
  for (const auto& [key, counts] : normal) normal_by_base[base_scenario_key(key)] = &counts;
  for (const auto& [key, counts] : oos) oos_by_base[base_scenario_key(key)] = &counts;

  if (normal_by_base.size() != normal.size() || oos_by_base.size() != oos.size()) {
    throw ScenarioMismatch("a log contains both a scenario and its doubled variant");
  }
  std::set<std::string> keys;
  for (const auto& [k, _] : normal_by_base) keys.insert(k);
  for (const auto& [k, _] : oos_by_base) {
    if (!keys.count(k)) throw ScenarioMismatch("scenario only present in one log: " + k);
  }
  for (const auto& k : keys) {
    if (!oos_by_base.count(k)) throw ScenarioMismatch("scenario only present in one log: " + k);
  }

  ComparisonReport report;
  for (const auto& [key, normal_counts] : normal_by_base) {
    const ScenarioCounts& oos_counts = *oos_by_base.at(key);
    const auto a = sample_of(*normal_counts, denom);
    const auto b = sample_of(oos_counts, denom);
    const ZTestResult t = two_prop_ztest(a, b, options);
    ComparisonRow row;
    row.scenario = key;
    row.normal_ratio = t.p1;
    row.oos_ratio = t.p2;
    row.diff = t.diff;
    row.se = t.se;
    row.z = t.z;
    row.p_value = t.p_value;
    row.stars = t.stars;
    report.rows.push_back(std::move(row));
  }
  report.average = summary_row("AVERAGE", report.rows, false, options);
  report.median = summary_row("MEDIAN", report.rows, true, options);
  return report;
}

std::string comparison_to_csv(const ComparisonReport& report) {
  std::ostringstream out;
  for (std::size_t i = 0; i < std::size(kComparisonColumns); ++i) {
    out << (i ? "," : "") << kComparisonColumns[i];
  }
  out << '\n';
  for (const auto& r : report.rows) append_comparison_csv_row(out, r);
  append_comparison_csv_row(out, report.average);
  append_comparison_csv_row(out, report.median);
  return out.str();
}

std::string comparison_to_markdown(const ComparisonReport& report) {
  std::ostringstream out;
  out << "|";
  for (const char* c : kComparisonColumns) out << ' ' << c << " |";
  out << "\n|";
  for (std::size_t i = 0; i < std::size(kComparisonColumns); ++i) out << " --- |";
  out << '\n';
  for (const auto& r : report.rows) append_comparison_md_row(out, r);
  append_comparison_md_row(out, report.average);
  append_comparison_md_row(out, report.median);
  return out.str();
}

std::string comparison_to_json(const ComparisonReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(comparison_row_json(r));
  json doc{{"rows", rows},
           {"average", comparison_row_json(report.average)},
           {"median", comparison_row_json(report.median)}};
  return doc.dump(2) + "\n";
}

ImprovementReport improvement_report(const AggregateMap& teacher, const AggregateMap& baseline,
                                     const AggregateMap& tuned, GroupBy group_by,
                                     Denominator denom) {
  struct GroupCounts {
    std::int64_t coop[3] = {0, 0, 0};
    std::int64_t total[3] = {0, 0, 0};
  };
  std::map<std::string, GroupCounts> groups;

  const AggregateMap* logs[3] = {&teacher, &baseline, &tuned};
  std::set<std::string> key_check[3];
  for (int i = 0; i < 3; ++i) {
    for (const auto& [key, counts] : *logs[i]) {
      if (counts.n_ok == 0 && counts.contributions.empty() && counts.n_invalid == 0) continue;
      if (!counts.contributions.empty()) continue;  // contribution scenarios have no C ratio
      key_check[i].insert(base_scenario_key(key));
      auto& g = groups[group_label(key, group_by)];
      g.coop[i] += counts.n_coop;
      g.total[i] += denom_of(counts, denom);
    }
  }
  if (key_check[0] != key_check[1] || key_check[0] != key_check[2]) {
    throw ScenarioMismatch("the three logs cover different scenario sets");
  }

  ImprovementReport report;
  report.group_by = group_by;
  double sum = 0;
  std::size_t defined = 0;
  for (const auto& [label, g] : groups) {
    ImprovementRow row;
    row.label = label;
    for (int i = 0; i < 3; ++i) {
      if (g.total[i] == 0) throw EmptySample("no parsed trials for group " + label);
    }
    row.teacher = static_cast<double>(g.coop[0]) / static_cast<double>(g.total[0]);
    row.baseline = static_cast<double>(g.coop[1]) / static_cast<double>(g.total[1]);
    row.tuned = static_cast<double>(g.coop[2]) / static_cast<double>(g.total[2]);
    const ImprovementResult res = improvement(row.teacher, row.baseline, row.tuned);
    row.value = res.value;
    row.cls = improvement_class_name(res.cls);
    if (row.value) {
      sum += *row.value;
      ++defined;
    }
    report.rows.push_back(std::move(row));
  }
  if (defined > 0) report.average = sum / static_cast<double>(defined);
  return report;
}

namespace {

double display_scale(const ImprovementReport& r) {
  return r.percent ? 100.0 : 1.0;
}

}  // namespace

std::string improvement_to_csv(const ImprovementReport& report) {
  const double k = display_scale(report);
  std::ostringstream out;
  out << group_by_name(report.group_by)
      << ",teacher C ratio,baseline C ratio,tuned C ratio,improvement,class\n";
  for (const auto& r : report.rows) {
    out << r.label << ',' << fmt2(r.teacher) << ',' << fmt2(r.baseline) << ',' << fmt2(r.tuned)
        << ',' << (r.value ? fmt2(*r.value * k) : std::string("")) << ',' << r.cls << '\n';
  }
  if (report.average) out << "AVERAGE,,,," << fmt2(*report.average * k) << ",\n";
  return out.str();
}

std::string improvement_to_markdown(const ImprovementReport& report) {
  const double k = display_scale(report);
  std::ostringstream out;
  out << "| " << group_by_name(report.group_by)
      << " | teacher C ratio | baseline C ratio | tuned C ratio | improvement | class |\n"
      << "| --- | --- | --- | --- | --- | --- |\n";
  for (const auto& r : report.rows) {
    out << "| " << r.label << " | " << fmt2(r.teacher) << " | " << fmt2(r.baseline) << " | "
        << fmt2(r.tuned) << " | " << (r.value ? fmt2(*r.value * k) : std::string("-")) << " | "
        << r.cls << " |\n";
  }
  if (report.average) {
    out << "| AVERAGE |  |  |  | " << fmt2(*report.average * k) << " |  |\n";
  }
  return out.str();
}

std::string improvement_to_json(const ImprovementReport& report) {
  const double k = display_scale(report);
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row{{"label", r.label}, {"teacher", r.teacher},
             {"baseline", r.baseline}, {"tuned", r.tuned},
             {"class", r.cls}};
    row["improvement"] = r.value ? json(*r.value * k) : json();
    rows.push_back(std::move(row));
  }
  json doc{{"group_by", group_by_name(report.group_by)}, {"bars", rows}};
  doc["average"] = report.average ? json(*report.average * k) : json();
  return doc.dump(2) + "\n";
}

CoopReport coop_report(const AggregateMap& agg, GroupBy group_by, Denominator denom) {
  struct GroupCounts {
    std::int64_t coop = 0;
    std::int64_t total = 0;
  };
  std::map<std::string, GroupCounts> groups;
  for (const auto& [key, counts] : agg) {
    if (!counts.contributions.empty()) continue;
    auto& g = groups[group_label(key, group_by)];
    g.coop += counts.n_coop;
    g.total += denom_of(counts, denom);
  }
  CoopReport report;
  report.group_by = group_by;
  for (const auto& [label, g] : groups) {
    if (g.total == 0) continue;
    CoopBar bar;
    bar.label = label;
    bar.n_ok = g.total;
    bar.coop_rate = static_cast<double>(g.coop) / static_cast<double>(g.total);
    bar.se = std::sqrt(bar.coop_rate * (1.0 - bar.coop_rate) / static_cast<double>(g.total));
    report.bars.push_back(std::move(bar));
  }
  return report;
}

std::string coop_to_csv(const CoopReport& report) {
  std::ostringstream out;
  out << group_by_name(report.group_by) << ",coop_rate,se,n\n";
  for (const auto& b : report.bars) {
    out << b.label << ',' << b.coop_rate << ',' << b.se << ',' << b.n_ok << '\n';
  }
  return out.str();
}

std::string coop_to_json(const CoopReport& report) {
  json bars = json::array();
  for (const auto& b : report.bars) {
    bars.push_back(json{
        {"label", b.label}, {"coop_rate", b.coop_rate}, {"se", b.se}, {"n", b.n_ok}});
  }
  json doc{{"group_by", group_by_name(report.group_by)}, {"bars", bars}};
  return doc.dump(2) + "\n";
}

}  // namespace dilemma
