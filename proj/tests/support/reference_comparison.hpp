#pragma once

// Externally reported normal-vs-doubled cooperation comparison for a
// fine-tuned 7B chat model at n = 300 per cell, kept as an annotated fixture.
//
// Annotation: the printed SE and z columns are not reproducible from the
// rounded ratios at n = 300 with the pooled two-proportion formula (e.g.
// team_prison: pooled SE at 225/300 vs 213/300 is ~0.036, printed 0.02; the
// source's appendix variant even prints 4.02 for friendsharing_delight where
// 0.02 is clearly meant). They are therefore reference annotations, not
// pass/fail targets; only the difference column is asserted, to +/-0.01.
struct ReferenceRow {
  const char* scenario;
  double normal_ratio;
  double oos_ratio;
  double diff;
  double se;
  double z;
  double p;
  const char* stars;
};

inline constexpr ReferenceRow kReferenceRows[] = {
    {"team_prison", 0.75, 0.71, -0.04, 0.02, 1.60, 0.05, "*"},
    {"team_delight", 0.74, 0.76, 0.01, 0.03, -0.53, 0.30, ""},
    {"team_staghunt", 0.74, 0.71, -0.03, 0.03, 1.18, 0.12, ""},
    {"team_snowdrift", 0.70, 0.72, 0.02, 0.03, -0.88, 0.19, ""},
    {"IR_prison", 0.74, 0.71, -0.03, 0.03, 1.05, 0.15, ""},
    {"IR_delight", 0.75, 0.70, -0.05, 0.02, 2.00, 0.02, "*"},
    {"IR_staghunt", 0.72, 0.69, -0.03, 0.03, 1.29, 0.10, ""},
    {"IR_snowdrift", 0.71, 0.74, 0.02, 0.03, -0.89, 0.19, ""},
    {"friendsharing_prison", 0.75, 0.70, -0.05, 0.02, 2.00, 0.02, "*"},
    {"friendsharing_delight", 0.79, 0.74, -0.05, 0.02, 2.11, 0.02, "*"},
    {"friendsharing_staghunt", 0.71, 0.77, 0.06, 0.03, -2.17, 0.01, "**"},
    {"friendsharing_snowdrift", 0.76, 0.76, 0.00, 0.02, -0.14, 0.45, ""},
    {"biz_prison", 0.74, 0.70, -0.04, 0.03, 1.72, 0.04, "*"},
    {"biz_delight", 0.74, 0.76, 0.03, 0.03, -1.05, 0.15, ""},
    {"biz_staghunt", 0.71, 0.63, -0.08, 0.03, 3.06, 0.00, "***"},
    {"biz_snowdrift", 0.74, 0.76, 0.01, 0.03, -0.53, 0.30, ""},
    {"environment_prison", 0.63, 0.66, 0.03, 0.03, -0.96, 0.17, ""},
    {"environment_delight", 0.69, 0.72, 0.03, 0.03, -1.00, 0.16, ""},
    {"environment_staghunt", 0.65, 0.64, -0.02, 0.03, 0.61, 0.27, ""},
    {"environment_snowdrift", 0.62, 0.67, 0.05, 0.03, -1.67, 0.05, "*"},
};

inline constexpr ReferenceRow kReferenceAverage = {"AVERAGE", 0.72, 0.71, -0.01, 0.03,
                                                   0.31,      0.38, ""};
inline constexpr ReferenceRow kReferenceMedian = {"MEDIAN", 0.74, 0.71, -0.01, 0.03,
                                                  1.05,     0.15, ""};

inline constexpr int kReferenceN = 300;
