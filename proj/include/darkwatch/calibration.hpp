// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "darkwatch/corpus.hpp"
#include "darkwatch/reply_graph.hpp"

namespace darkwatch {

enum class FitMetric {
  /// Mean squared residual of log CCDF against a line of slope 1 - exponent
  /// (free intercept), evaluated at every integer k in [1, max in-degree].
  LeastSquaresCcdf,
  /// Kolmogorov-Smirnov distance to the discrete power law truncated at the
  /// largest observed in-degree.
  KolmogorovSmirnov,
};

/// Fit error of the in-degree sample against p(k) ∝ k^-exponent over k >= 1.
/// Zero in-degrees are ignored. Returns +inf when no degree is >= 1.
double power_law_fit_error(std::span<const std::size_t> in_degrees, double exponent,
                           FitMetric metric = FitMetric::LeastSquaresCcdf);

struct CandidateScore {
  ConstructionParams params;
  double error = std::numeric_limits<double>::infinity();
  std::size_t edges = 0;
};

struct CalibrationResult {
  ConstructionParams best;
  std::vector<CandidateScore> scores;  // grid order
};

/// In-degrees of every per-forum reply network built over each forum's full
/// span, pooled.
std::vector<std::size_t> pooled_in_degrees(const Corpus& corpus, const ConstructionParams& params);

/// Grid search for the (thresh_spat, thresh_temp) pair whose pooled
/// in-degree distribution best matches k^-exponent. Ties go to the smaller
/// spatial, then smaller temporal threshold. Throws DegenerateError when
/// every candidate produces an edgeless network.
CalibrationResult calibrate_thresholds(const Corpus& corpus, std::span<const ConstructionParams> grid,
                                       double exponent = 1.35, FitMetric metric = FitMetric::LeastSquaresCcdf);

}  // namespace darkwatch
