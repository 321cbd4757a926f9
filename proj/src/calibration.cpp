// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "darkwatch/error.hpp"

namespace darkwatch {

double power_law_fit_error(std::span<const std::size_t> in_degrees, double exponent, FitMetric metric) {
  std::size_t k_max = 0;
  std::size_t n = 0;
  for (auto k : in_degrees) {
    if (k == 0) continue;
    ++n;
    k_max = std::max(k_max, k);
  }
  if (n == 0) return std::numeric_limits<double>::infinity();

  // at_least[k] = #{degrees >= k}
  std::vector<std::size_t> at_least(k_max + 2, 0);
  for (auto k : in_degrees) {
    if (k > 0) ++at_least[k];
  }
  for (std::size_t k = k_max; k >= 1; --k) at_least[k] += at_least[k + 1];

  if (metric == FitMetric::LeastSquaresCcdf) {
    const double slope = 1.0 - exponent;
    std::vector<double> resid;
    resid.reserve(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
      double y = std::log(static_cast<double>(at_least[k]) / static_cast<double>(n));
      resid.push_back(y - slope * std::log(static_cast<double>(k)));
    }
    double mean = 0.0;
    for (double r : resid) mean += r;
    mean /= static_cast<double>(resid.size());
    double sse = 0.0;
    for (double r : resid) sse += (r - mean) * (r - mean);
    return sse / static_cast<double>(resid.size());
  }

  double norm = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) norm += std::pow(static_cast<double>(k), -exponent);
  double cdf_theory = 0.0;
  double worst = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    cdf_theory += std::pow(static_cast<double>(k), -exponent) / norm;
    double cdf_emp = 1.0 - static_cast<double>(at_least[k + 1]) / static_cast<double>(n);
    worst = std::max(worst, std::abs(cdf_emp - cdf_theory));
  }
  return worst;
}

std::vector<std::size_t> pooled_in_degrees(const Corpus& corpus, const ConstructionParams& params) {
  std::vector<std::size_t> degrees;
  for (const auto& forum : corpus.forums) {
    auto span = forum.span();
    if (!span) continue;
    auto g = create_graph(forum, *span, params);
    degrees.insert(degrees.end(), g.in_degrees().begin(), g.in_degrees().end());
  }
  return degrees;
}

CalibrationResult calibrate_thresholds(const Corpus& corpus, std::span<const ConstructionParams> grid,
                                       double exponent, FitMetric metric) {
  if (grid.empty()) throw ConfigError("calibration grid is empty");
  CalibrationResult result;
  const CandidateScore* best = nullptr;
  for (const auto& params : grid) {
    params.validate();
    CandidateScore score{params};
    auto degrees = pooled_in_degrees(corpus, params);
    for (auto d : degrees) score.edges += d;
    if (score.edges > 0) score.error = power_law_fit_error(degrees, exponent, metric);
    result.scores.push_back(score);
  }
  for (const auto& s : result.scores) {
    if (s.edges == 0) continue;
    if (!best || s.error < best->error ||
        (s.error == best->error &&
         std::tie(s.params.spatial_posts, s.params.temporal) < std::tie(best->params.spatial_posts, best->params.temporal))) {
      best = &s;
    }
  }
  if (!best) throw DegenerateError("every calibration candidate produced an edgeless reply network");
  result.best = best->params;
  return result;
}

}  // namespace darkwatch
