// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "darkwatch/anomaly.hpp"
#include "darkwatch/corpus.hpp"
#include "darkwatch/features.hpp"

namespace darkwatch {

/// Forum-averaged daily series of one feature.
struct AggregateSeries {
  FeatureId feature = FeatureId::Conductance;
  DayRange span{};
  std::vector<double> values;
};

/// Arithmetic mean across forums per day; flagged zero days included.
AggregateSeries forum_average(std::span<const FeatureSeries* const> series);

/// Design matrix over lag windows. Row for day t holds, per feature, the
/// values at t−δ−η, ..., t−δ (feature-major, lags descending).
struct LagDesign {
  std::vector<FeatureId> features;
  int eta = 7;
  int delta = 8;
  std::vector<Day> days;           // one per row
  MatrixX<double> X;
  VectorX<double> y;
  std::vector<Day> excluded;       // requested days lacking full history

  /// Column label `<feature>@t-<lag>`.
  [[nodiscard]] std::string column_name(Eigen::Index col) const;
};

LagDesign build_lag_features(std::span<const AggregateSeries> series, const LabelSeries& labels, int eta, int delta,
                             DayRange span);

/// Column index sets, one per lag position: group j holds column j of every
/// feature block.
std::vector<std::vector<Eigen::Index>> lag_groups(std::size_t n_features, int eta);

// ---------------------------------------------------------------------------
// Objectives over θ = (β₀, β). The intercept is never penalised.

template <typename Scalar>
Scalar softplus(Scalar z) {
  return z > Scalar(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// −Σ [yᵢ zᵢ − log(1 + exp(zᵢ))], zᵢ = β₀ + xᵢᵀβ.
template <typename Scalar>
Scalar logistic_loss(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& theta) {
  const VectorX<Scalar> z = (X * theta.tail(X.cols())).array() + theta(0);
  Scalar total(0);
  for (Eigen::Index i = 0; i < z.size(); ++i) total += softplus(z(i)) - y(i) * z(i);
  return total;
}

template <typename Scalar>
VectorX<Scalar> logistic_gradient(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& theta) {
  const VectorX<Scalar> z = (X * theta.tail(X.cols())).array() + theta(0);
  VectorX<Scalar> r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r(i) = sigmoid(z(i)) - y(i);
  VectorX<Scalar> g(theta.size());
  g(0) = r.sum();
  g.tail(X.cols()) = X.transpose() * r;
  return g;
}

/// Logistic loss + λ βᵀβ.
template <typename Scalar>
Scalar ridge_objective(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& theta,
                       Scalar lambda) {
  return logistic_loss(X, y, theta) + lambda * theta.tail(X.cols()).squaredNorm();
}

template <typename Scalar>
VectorX<Scalar> ridge_gradient(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& theta,
                               Scalar lambda) {
  VectorX<Scalar> g = logistic_gradient(X, y, theta);
  g.tail(X.cols()) += Scalar(2) * lambda * theta.tail(X.cols());
  return g;
}

struct GroupLassoPenalty {
  double m = 0.3;  // (m/2)‖β‖²
  double l = 0.3;  // l‖β‖₁
  double g = 0.1;  // g Σ ‖β_{I_g}‖
};

/// Smooth part: logistic loss + (m/2)‖β‖².
template <typename Scalar>
Scalar group_lasso_smooth(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& theta,
                          const GroupLassoPenalty& p) {
  return logistic_loss(X, y, theta) + Scalar(p.m / 2.0) * theta.tail(X.cols()).squaredNorm();
}

template <typename Scalar>
VectorX<Scalar> group_lasso_smooth_gradient(const MatrixX<Scalar>& X, const VectorX<Scalar>& y,
                                            const VectorX<Scalar>& theta, const GroupLassoPenalty& p) {
  VectorX<Scalar> g = logistic_gradient(X, y, theta);
  g.tail(X.cols()) += Scalar(p.m) * theta.tail(X.cols());
  return g;
}

/// l‖β‖₁ + g Σ_groups ‖β_group‖. Group indices address β (not θ).
template <typename Scalar>
Scalar group_lasso_penalty(const VectorX<Scalar>& beta, const std::vector<std::vector<Eigen::Index>>& groups,
                           const GroupLassoPenalty& p) {
  Scalar total = Scalar(p.l) * beta.template lpNorm<1>();
  for (const auto& grp : groups) {
    Scalar sq(0);
    for (auto i : grp) sq += beta(i) * beta(i);
    total += Scalar(p.g) * std::sqrt(sq);
  }
  return total;
}

template <typename Scalar>
Scalar group_lasso_objective(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& theta,
                             const std::vector<std::vector<Eigen::Index>>& groups, const GroupLassoPenalty& p) {
  return group_lasso_smooth(X, y, theta, p) + group_lasso_penalty<Scalar>(theta.tail(X.cols()), groups, p);
}

/// Soft-threshold by step·l, then shrink each group by
/// max(0, 1 − step·g/‖β_group‖). Applied to β in place.
template <typename Scalar>
void group_lasso_prox(Eigen::Ref<VectorX<Scalar>> beta, Scalar step, const std::vector<std::vector<Eigen::Index>>& groups,
                      const GroupLassoPenalty& p) {
  const Scalar t1 = step * Scalar(p.l);
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const Scalar a = std::abs(beta(i)) - t1;
    beta(i) = a > Scalar(0) ? std::copysign(a, beta(i)) : Scalar(0);
  }
  const Scalar t2 = step * Scalar(p.g);
  for (const auto& grp : groups) {
    Scalar sq(0);
    for (auto i : grp) sq += beta(i) * beta(i);
    const Scalar norm = std::sqrt(sq);
    const Scalar factor = norm > t2 ? Scalar(1) - t2 / norm : Scalar(0);
    for (auto i : grp) beta(i) *= factor;
  }
}

// ---------------------------------------------------------------------------

struct TrainConfig {
  int eta = 7;
  int delta = 8;
  double tolerance = 1e-12;  // relative objective decrease
  int max_iterations = 20000;
  double initial_step = 1.0;
  /// Starting θ; zero when absent.
  std::optional<VectorX<double>> initial;
  bool standardize = true;
  bool smote = false;
  std::size_t smote_k = 5;
  double smote_ratio = 1.0;  // minority : majority after oversampling
  std::uint64_t seed = 0;
};

struct TrainTrace {
  std::vector<double> objective;  // per accepted iteration, starting point first
  int iterations = 0;
  bool converged = false;
};

struct FitResult {
  VectorX<double> theta;
  TrainTrace trace;
};

/// Gradient descent, Barzilai-Borwein trial step with Armijo backtracking.
FitResult fit_ridge(const MatrixX<double>& X, const VectorX<double>& y, double lambda, const TrainConfig& config);

/// Proximal gradient with backtracking on the smooth part.
FitResult fit_group_lasso(const MatrixX<double>& X, const VectorX<double>& y,
                          const std::vector<std::vector<Eigen::Index>>& groups, const GroupLassoPenalty& penalty,
                          const TrainConfig& config);

struct Oversampled {
  MatrixX<double> X;
  VectorX<double> y;
  std::size_t synthetic = 0;
};

/// Appends minority rows x + u(x_nn − x), u ~ U(0,1), x_nn one of the k
/// nearest minority rows. Base rows cycle through the minority rows in
/// order. Adds ceil(ratio·majority) − minority rows (none if negative).
Oversampled smote_oversample(const MatrixX<double>& X, const VectorX<double>& y, std::size_t k, double ratio,
                             std::uint64_t seed);

enum class Regularization { Ridge, GroupLasso };

struct LogitModel {
  double intercept = 0.0;
  VectorX<double> weights;
  std::vector<FeatureId> features;
  int eta = 7;
  int delta = 8;
  EventType event_type = EventType::MaliciousEmail;
  Regularization regularization = Regularization::Ridge;
  double lambda = 1.0;
  GroupLassoPenalty penalty;
  /// Column standardisation applied before the weights; empty = identity.
  VectorX<double> center;
  VectorX<double> scale;
  double decision_threshold = 0.5;

  [[nodiscard]] Eigen::Index dimension() const { return weights.size(); }
};

struct Prediction {
  double probability = 0.5;
  int label = 0;
};

/// Probability by the logistic link; label = probability > threshold.
Prediction predict(const LogitModel& model, const VectorX<double>& row);
std::vector<Prediction> predict(const LogitModel& model, const MatrixX<double>& rows);

struct TrainedModel {
  LogitModel model;
  TrainTrace trace;
  std::size_t synthetic_rows = 0;
};

/// Throws DegenerateError on single-class labels.
TrainedModel train_ridge_logit(const LagDesign& design, double lambda, const TrainConfig& config,
                               EventType event_type = EventType::MaliciousEmail);
TrainedModel train_group_lasso_logit(const LagDesign& design, const GroupLassoPenalty& penalty,
                                     const TrainConfig& config, EventType event_type = EventType::MaliciousEmail);

void write_logit_model(std::ostream& out, const LogitModel& model);
LogitModel read_logit_model(std::istream& in);

}  // namespace darkwatch
