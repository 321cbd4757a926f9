// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>

#include "darkwatch/error.hpp"
#include "darkwatch/random.hpp"

namespace darkwatch {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

SplitSpec chrono_split(DayRange span, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  if (span.empty()) throw DegenerateError("cannot split an empty span");
  const int months = months_touched(span.first, span.last);
  if (months < 2) throw DegenerateError("split needs a span touching at least two months");
  const int k = std::clamp(static_cast<int>(std::lround(ratio * months)), 1, months - 1);
  const Day boundary = add_months(month_start(span.first), k);
  SplitSpec s;
  s.ratio = ratio;
  s.total_months = months;
  s.train_months = k;
  s.train = {span.first, boundary - std::chrono::days{1}};
  s.test = {boundary, span.last};
  return s;
}

std::vector<double> default_threshold_grid(std::span<const double> scores) {
  std::vector<double> grid(scores.begin(), scores.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (!grid.empty()) grid.insert(grid.begin(), std::nextafter(grid.front(), -std::numeric_limits<double>::infinity()));
  return grid;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels, std::span<const double> thresholds) {
  if (scores.size() != labels.size()) throw ConfigError("scores and labels differ in length");
  std::size_t pos = 0;
  for (int l : labels) pos += l ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw DegenerateError("ROC needs both classes");

  // sort once so each threshold costs a binary search
  std::vector<std::pair<double, int>> ranked(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) ranked[i] = {scores[i], labels[i] ? 1 : 0};
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::size_t> pos_above(ranked.size() + 1, 0);  // positives in ranked[i..]
  for (std::size_t i = ranked.size(); i-- > 0;) pos_above[i] = pos_above[i + 1] + static_cast<std::size_t>(ranked[i].second);

  RocCurve curve;
  for (double th : thresholds) {
    auto it = std::upper_bound(ranked.begin(), ranked.end(), th,
                               [](double v, const std::pair<double, int>& p) { return v < p.first; });
    const auto i = static_cast<std::size_t>(it - ranked.begin());
    const std::size_t predicted = ranked.size() - i;
    const std::size_t tp = pos_above[i];
    const std::size_t fp = predicted - tp;
    curve.points.push_back({th, static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
  }

  std::vector<std::pair<double, double>> pts;
  pts.emplace_back(0.0, 0.0);
  for (const auto& p : curve.points) pts.emplace_back(p.fpr, p.tpr);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  }
  curve.auc = area;
  return curve;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const auto grid = default_threshold_grid(scores);
  return roc_auc(scores, labels, grid);
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

double uniform_baseline_f1(double positive_rate) {
  return positive_rate > 0.0 ? 2.0 * 0.5 * positive_rate / (0.5 + positive_rate) : 0.0;
}

double prior_baseline_f1(double positive_rate) { return positive_rate; }

MetricsReport prf1(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ConfigError("predictions and labels differ in length");
  MetricsReport r;
  auto& c = r.confusion;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] != 0, l = labels[i] != 0;
    if (p && l) ++c.tp;
    else if (p) ++c.fp;
    else if (l) ++c.fn;
    else ++c.tn;
  }
  r.days = labels.size();
  r.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  r.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  r.f1 = f1_score(r.precision, r.recall);
  r.positive_rate = r.days > 0 ? static_cast<double>(c.tp + c.fn) / static_cast<double>(r.days) : 0.0;
  r.uniform_baseline_f1 = uniform_baseline_f1(r.positive_rate);
  r.prior_baseline_f1 = prior_baseline_f1(r.positive_rate);
  return r;
}

SampledBaselines sampled_baselines(std::span<const int> labels, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ConfigError("sampled baselines need at least one trial");
  std::size_t pos = 0;
  for (int l : labels) pos += l ? 1 : 0;
  const double pi = labels.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(labels.size());
  Rng rng(seed);
  SampledBaselines out;
  std::vector<int> guess(labels.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& g : guess) g = rng.bernoulli(0.5) ? 1 : 0;
    out.uniform_f1 += prf1(guess, labels).f1;
    for (auto& g : guess) g = rng.bernoulli(pi) ? 1 : 0;
    out.prior_f1 += prf1(guess, labels).f1;
  }
  out.uniform_f1 /= static_cast<double>(trials);
  out.prior_f1 /= static_cast<double>(trials);
  return out;
}

std::vector<char> high_activity_filter(const LabelSeries& labels, DayRange span, int more_than) {
  std::map<IsoWeek, long> weekly;
  for (std::size_t i = 0; i < span.size(); ++i) weekly[iso_week(span.at(i))] += labels.count_on(span.at(i));
  std::vector<char> mask(span.size(), 0);
  for (std::size_t i = 0; i < span.size(); ++i) mask[i] = weekly[iso_week(span.at(i))] > more_than ? 1 : 0;
  return mask;
}

void write_report_table(std::ostream& out, std::span<const MetricsReport> reports) {
  out << std::left << std::setw(34) << "report" << std::right << std::setw(7) << "days" << std::setw(6) << "tp"
      << std::setw(6) << "fp" << std::setw(6) << "fn" << std::setw(10) << "precision" << std::setw(8) << "recall"
      << std::setw(8) << "f1" << std::setw(8) << "auc" << std::setw(10) << "f1_unif" << std::setw(10) << "f1_prior"
      << '\n';
  for (const auto& r : reports) {
    out << std::left << std::setw(34) << r.name << std::right << std::setw(7) << r.days << std::setw(6)
        << r.confusion.tp << std::setw(6) << r.confusion.fp << std::setw(6) << r.confusion.fn << std::setw(10)
        << fixed4(r.precision) << std::setw(8) << fixed4(r.recall) << std::setw(8) << fixed4(r.f1) << std::setw(8)
        << (r.auc ? fixed4(*r.auc) : std::string("-")) << std::setw(10) << fixed4(r.uniform_baseline_f1)
        << std::setw(10) << fixed4(r.prior_baseline_f1) << '\n';
    if (!r.config.empty()) {
      out << "  ";
      for (std::size_t i = 0; i < r.config.size(); ++i) {
        out << (i ? " " : "") << r.config[i].first << '=' << r.config[i].second;
      }
      out << " unpredictable=" << r.unpredictable << '\n';
    }
  }
}

void write_report_csv(std::ostream& out, std::span<const MetricsReport> reports) {
  out << "report,days,unpredictable,tp,fp,tn,fn,precision,recall,f1,auc,positive_rate,uniform_f1,prior_f1,config\n";
  for (const auto& r : reports) {
    out << r.name << ',' << r.days << ',' << r.unpredictable << ',' << r.confusion.tp << ',' << r.confusion.fp << ','
        << r.confusion.tn << ',' << r.confusion.fn << ',' << g17(r.precision) << ',' << g17(r.recall) << ','
        << g17(r.f1) << ',' << (r.auc ? g17(*r.auc) : std::string()) << ',' << g17(r.positive_rate) << ','
        << g17(r.uniform_baseline_f1) << ',' << g17(r.prior_baseline_f1) << ',';
    for (std::size_t i = 0; i < r.config.size(); ++i) {
      out << (i ? ";" : "") << r.config[i].first << '=' << r.config[i].second;
    }
    out << '\n';
  }
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points) out << g17(p.threshold) << ',' << g17(p.fpr) << ',' << g17(p.tpr) << '\n';
  out << "# auc," << g17(curve.auc) << '\n';
}

}  // namespace darkwatch
