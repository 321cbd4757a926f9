// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "darkwatch/error.hpp"
#include "darkwatch/features.hpp"
#include "darkwatch/time.hpp"

namespace darkwatch {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Day x forum values of one feature.
template <typename Scalar = double>
struct MeasurementMatrix {
  FeatureId feature = FeatureId::Conductance;
  DayRange span{};
  std::vector<std::string> forums;
  MatrixX<Scalar> values;
  VectorX<Scalar> column_means;
};

/// Rows span.first..span.last, columns in the order of `series`.
MeasurementMatrix<double> assemble_matrix(std::span<const FeatureSeries* const> series, DayRange span);

/// Principal axes of mean-centred data; the first r span the normal subspace.
template <typename Scalar = double>
struct SubspaceModel {
  FeatureId feature = FeatureId::Conductance;
  VectorX<Scalar> means;      // F
  MatrixX<Scalar> axes;       // F x K, orthonormal columns, variance non-increasing
  VectorX<Scalar> variances;  // K
  Eigen::Index r = 3;

  [[nodiscard]] Eigen::Index columns() const { return means.size(); }
  [[nodiscard]] auto normal_basis() const { return axes.leftCols(r); }
  /// C = P Pᵀ
  [[nodiscard]] MatrixX<Scalar> normal_projector() const { return normal_basis() * normal_basis().transpose(); }
  /// C̃ = I − P Pᵀ
  [[nodiscard]] MatrixX<Scalar> residual_projector() const {
    return MatrixX<Scalar>::Identity(columns(), columns()) - normal_projector();
  }
};

/// SVD of the column-centred matrix. Each axis is flipped so that its
/// largest-magnitude entry (first on ties) is positive.
template <typename Derived>
SubspaceModel<typename Derived::Scalar> fit_subspace(const Eigen::MatrixBase<Derived>& Y, Eigen::Index K = 8,
                                                     Eigen::Index r = 3) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index T = Y.rows(), F = Y.cols();
  if (T < 2) throw DegenerateError("subspace fit needs at least two rows");
  if (!(0 <= r && r < K && K <= F)) {
    throw ConfigError("subspace fit needs 0 <= r < K <= columns (r=" + std::to_string(r) + ", K=" +
                      std::to_string(K) + ", columns=" + std::to_string(F) + ")");
  }
  SubspaceModel<Scalar> model;
  model.r = r;
  model.means = Y.colwise().mean().transpose();
  const MatrixX<Scalar> centred = Y.rowwise() - model.means.transpose();
  Eigen::BDCSVD<MatrixX<Scalar>> svd(centred, Eigen::ComputeThinV);
  const Eigen::Index available = svd.matrixV().cols();
  model.axes = MatrixX<Scalar>::Zero(F, K);
  model.variances = VectorX<Scalar>::Zero(K);
  for (Eigen::Index k = 0; k < std::min(K, available); ++k) {
    VectorX<Scalar> v = svd.matrixV().col(k);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < F; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    }
    if (v(arg) < Scalar(0)) v = -v;
    model.axes.col(k) = v;
    const Scalar s = svd.singularValues()(k);
    model.variances(k) = s * s / Scalar(T - 1);
  }
  return model;
}

/// ‖C̃ (y − means)‖² for every row y.
template <typename Scalar, typename Derived>
VectorX<Scalar> spe(const SubspaceModel<Scalar>& model, const Eigen::MatrixBase<Derived>& rows) {
  if (rows.cols() != model.columns()) {
    throw ConfigError("row dimension " + std::to_string(rows.cols()) + " does not match model dimension " +
                      std::to_string(model.columns()));
  }
  const MatrixX<Scalar> centred = rows.rowwise() - model.means.transpose();
  const MatrixX<Scalar> residual = centred - (centred * model.normal_basis()) * model.normal_basis().transpose();
  return residual.rowwise().squaredNorm();
}

struct ResidualSeries {
  DayRange span{};
  std::vector<double> spe;
  double threshold = 0.0;  // δ_α²
  std::vector<char> flags;

  [[nodiscard]] std::size_t flagged() const;
};

ResidualSeries spe_series(const SubspaceModel<double>& model, const MeasurementMatrix<double>& matrix);

/// Absolute SPE threshold, or a quantile of the training-span SPE values.
struct ThresholdSpec {
  enum class Kind { Absolute, Quantile } kind = Kind::Quantile;
  double value = 0.95;
};

/// Order statistic at position ceil(q·n) (1-based) of `training`.
double quantile_threshold(std::span<const double> training, double q);

/// Sets the threshold and flags SPE > threshold. A quantile spec resolves
/// against the SPE values inside `training` only.
void flag_anomalies(ResidualSeries& series, const ThresholdSpec& spec, std::optional<DayRange> training = std::nullopt);

/// Minimum flagged days in the window for a positive prediction: max(1, ζ/7).
double required_anomalies(double zeta);

struct DailyPredictions {
  DayRange span{};
  std::vector<int> predicted;       // 0/1, 0 on unpredictable days
  std::vector<char> predictable;    // window fully covered by the flag series
  std::vector<double> score;        // see window_scores

  [[nodiscard]] std::size_t unpredictable() const;
};

/// Predicts 1 on day t iff at least max(1, ζ/7) days of [t−η−δ, t−δ] are
/// flagged.
DailyPredictions predict_attacks_unsupervised(const ResidualSeries& flags, DayRange target, int eta, int delta,
                                              double zeta = 1.0);

/// Per-day score whose threshold sweep reproduces the rule above: the k-th
/// largest SPE in [t−η−δ, t−δ], k = ceil(max(1, ζ/7)). Prediction at
/// threshold θ is score > θ.
DailyPredictions window_scores(const ResidualSeries& series, DayRange target, int eta, int delta, double zeta = 1.0);

/// Text model: feature, dimensions, means, variances and axes at 17
/// significant digits.
void write_subspace_model(std::ostream& out, const SubspaceModel<double>& model,
                          std::span<const std::string> forums, std::optional<double> threshold = std::nullopt);

struct LoadedSubspaceModel {
  SubspaceModel<double> model;
  std::vector<std::string> forums;
  std::optional<double> threshold;
};
LoadedSubspaceModel read_subspace_model(std::istream& in);

}  // namespace darkwatch
