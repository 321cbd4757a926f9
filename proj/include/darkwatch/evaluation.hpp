// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "darkwatch/corpus.hpp"
#include "darkwatch/time.hpp"

namespace darkwatch {

struct SplitSpec {
  DayRange train{};
  DayRange test{};
  double ratio = 0.7;
  int train_months = 0;
  int total_months = 0;
};

/// Chronological split at the month boundary nearest ratio × (months
/// touched by `span`), keeping at least one month on each side.
SplitSpec chrono_split(DayRange span, double ratio = 0.7);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // grid order
  double auc = 0.0;
};

/// Every distinct score plus one value below the minimum, ascending. Sweeping
/// it traces the exact empirical ROC curve.
std::vector<double> default_threshold_grid(std::span<const double> scores);

/// Prediction at threshold θ is score > θ. AUC is the trapezoid area over
/// the points sorted by (fpr, tpr) with (0,0) and (1,1) added. Throws
/// DegenerateError when only one class is present.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels, std::span<const double> thresholds);
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct MetricsReport {
  std::string name;
  Confusion confusion;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
  double positive_rate = 0.0;
  double uniform_baseline_f1 = 0.0;  // predict positive with probability 1/2
  double prior_baseline_f1 = 0.0;    // predict positive with probability π₊
  std::size_t days = 0;
  std::size_t unpredictable = 0;
  /// Settings echoed into the report.
  std::vector<std::pair<std::string, std::string>> config;
};

double f1_score(double precision, double recall);
/// Expected F1 of random guessing with P(positive) = 1/2: 2·0.5·π/(0.5+π).
double uniform_baseline_f1(double positive_rate);
/// Expected F1 of random guessing with P(positive) = π: π.
double prior_baseline_f1(double positive_rate);

MetricsReport prf1(std::span<const int> predictions, std::span<const int> labels);

struct SampledBaselines {
  double uniform_f1 = 0.0;
  double prior_f1 = 0.0;
};

/// Mean F1 of `trials` seeded random guessers of each kind.
SampledBaselines sampled_baselines(std::span<const int> labels, std::size_t trials, std::uint64_t seed);

/// Days of `span` whose ISO week has a summed incident count above
/// `more_than` (strict).
std::vector<char> high_activity_filter(const LabelSeries& labels, DayRange span, int more_than = 5);

void write_report_table(std::ostream& out, std::span<const MetricsReport> reports);
void write_report_csv(std::ostream& out, std::span<const MetricsReport> reports);
void write_roc_csv(std::ostream& out, const RocCurve& curve);

}  // namespace darkwatch
