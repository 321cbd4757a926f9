// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/supervised.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "darkwatch/error.hpp"
#include "darkwatch/random.hpp"

namespace darkwatch {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_both_classes(const VectorX<double>& y) {
  const double positives = y.sum();
  if (y.size() == 0 || positives == 0.0 || positives == static_cast<double>(y.size())) {
    throw DegenerateError("degenerate training set: labels contain a single class");
  }
}

}  // namespace

AggregateSeries forum_average(std::span<const FeatureSeries* const> series) {
  if (series.empty()) throw DataError("forum average needs at least one series");
  AggregateSeries out;
  out.feature = series.front()->feature;
  out.span = series.front()->span;
  out.values.assign(out.span.size(), 0.0);
  for (const auto* s : series) {
    if (s->span != out.span || s->feature != out.feature) throw DataError("forum average: series are not aligned");
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += s->values[i];
  }
  for (auto& v : out.values) v /= static_cast<double>(series.size());
  return out;
}

std::string LagDesign::column_name(Eigen::Index col) const {
  const auto width = static_cast<Eigen::Index>(eta + 1);
  const auto f = static_cast<std::size_t>(col / width);
  const auto lag = delta + eta - static_cast<int>(col % width);
  return std::string(to_string(features.at(f))) + "@t-" + std::to_string(lag);
}

LagDesign build_lag_features(std::span<const AggregateSeries> series, const LabelSeries& labels, int eta, int delta,
                             DayRange span) {
  if (eta < 1 || delta < 0) throw ConfigError("lag window needs eta >= 1 and delta >= 0");
  if (series.empty()) throw ConfigError("lag features need at least one series");
  LagDesign d;
  d.eta = eta;
  d.delta = delta;
  for (const auto& s : series) d.features.push_back(s.feature);

  const auto width = static_cast<std::size_t>(eta + 1);
  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  for (Day t = span.first; t <= span.last; t += std::chrono::days{1}) {
    const Day lo = t - std::chrono::days(eta + delta);
    const Day hi = t - std::chrono::days(delta);
    const bool covered = std::all_of(series.begin(), series.end(), [&](const AggregateSeries& s) {
      return s.span.contains(lo) && s.span.contains(hi);
    });
    if (!covered || !labels.span.contains(t)) {
      d.excluded.push_back(t);
      continue;
    }
    std::vector<double> row;
    row.reserve(series.size() * width);
    for (const auto& s : series) {
      for (std::size_t j = 0; j < width; ++j) row.push_back(s.values[static_cast<std::size_t>(s.span.index_of(lo)) + j]);
    }
    rows.push_back(std::move(row));
    ys.push_back(labels.label_on(t));
    d.days.push_back(t);
  }
  d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(series.size() * width));
  d.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    d.y(static_cast<Eigen::Index>(i)) = ys[i];
  }
  return d;
}

std::vector<std::vector<Eigen::Index>> lag_groups(std::size_t n_features, int eta) {
  const auto width = static_cast<Eigen::Index>(eta + 1);
  std::vector<std::vector<Eigen::Index>> groups(static_cast<std::size_t>(width));
  for (std::size_t f = 0; f < n_features; ++f) {
    for (Eigen::Index j = 0; j < width; ++j) {
      groups[static_cast<std::size_t>(j)].push_back(static_cast<Eigen::Index>(f) * width + j);
    }
  }
  return groups;
}

FitResult fit_ridge(const MatrixX<double>& X, const VectorX<double>& y, double lambda, const TrainConfig& config) {
  if (lambda < 0.0) throw ConfigError("ridge lambda must be non-negative");
  FitResult out;
  VectorX<double> theta = config.initial.value_or(VectorX<double>::Zero(X.cols() + 1));
  if (theta.size() != X.cols() + 1) throw ConfigError("initial parameter vector has the wrong length");
  double f = ridge_objective(X, y, theta, lambda);
  VectorX<double> g = ridge_gradient(X, y, theta, lambda);
  out.trace.objective.push_back(f);
  double step = config.initial_step;
  int flat = 0;
  for (int it = 0; it < config.max_iterations; ++it) {
    const double scale = std::max(1.0, std::abs(f));
    if (g.norm() <= 1e-9 * scale) {
      out.trace.converged = true;
      break;
    }
    double t = step;
    VectorX<double> next;
    double fn = f;
    bool accepted = false;
    while (t > 1e-30) {
      next = theta - t * g;
      fn = ridge_objective(X, y, next, lambda);
      if (fn <= f - 1e-4 * t * g.squaredNorm()) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      out.trace.converged = true;
      break;
    }
    const VectorX<double> gn = ridge_gradient(X, y, next, lambda);
    const VectorX<double> s = next - theta;
    const double sy = s.dot(gn - g);
    step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * t;
    const double decrease = f - fn;
    theta = next;
    f = fn;
    g = gn;
    out.trace.objective.push_back(f);
    ++out.trace.iterations;
    flat = decrease <= config.tolerance * scale ? flat + 1 : 0;
    if (flat >= 3) {
      out.trace.converged = true;
      break;
    }
  }
  out.theta = theta;
  return out;
}

FitResult fit_group_lasso(const MatrixX<double>& X, const VectorX<double>& y,
                          const std::vector<std::vector<Eigen::Index>>& groups, const GroupLassoPenalty& penalty,
                          const TrainConfig& config) {
  if (penalty.m < 0.0 || penalty.l < 0.0 || penalty.g < 0.0) throw ConfigError("penalties must be non-negative");
  FitResult out;
  VectorX<double> theta = config.initial.value_or(VectorX<double>::Zero(X.cols() + 1));
  if (theta.size() != X.cols() + 1) throw ConfigError("initial parameter vector has the wrong length");
  const auto p = X.cols();
  double F = group_lasso_objective(X, y, theta, groups, penalty);
  out.trace.objective.push_back(F);
  double t = config.initial_step;
  int flat = 0;
  for (int it = 0; it < config.max_iterations; ++it) {
    const double s0 = group_lasso_smooth(X, y, theta, penalty);
    const VectorX<double> gs = group_lasso_smooth_gradient(X, y, theta, penalty);
    VectorX<double> next;
    double sn = s0;
    while (true) {
      next = theta - t * gs;
      auto beta = next.tail(p);
      group_lasso_prox<double>(beta, t, groups, penalty);
      const VectorX<double> diff = next - theta;
      sn = group_lasso_smooth(X, y, next, penalty);
      if (sn <= s0 + gs.dot(diff) + diff.squaredNorm() / (2.0 * t) + 1e-15 * std::abs(s0) || t < 1e-30) break;
      t *= 0.5;
    }
    const double Fn = sn + group_lasso_penalty<double>(next.tail(p), groups, penalty);
    const double scale = std::max(1.0, std::abs(F));
    const double moved = (next - theta).norm() / t;
    if (!(Fn <= F)) {
      // no descent left at machine precision
      out.trace.converged = true;
      break;
    }
    const double decrease = F - Fn;
    theta = next;
    F = Fn;
    out.trace.objective.push_back(F);
    ++out.trace.iterations;
    if (moved <= 1e-9 * scale) {
      out.trace.converged = true;
      break;
    }
    flat = decrease <= config.tolerance * scale ? flat + 1 : 0;
    if (flat >= 3) {
      out.trace.converged = true;
      break;
    }
    t = std::min(t * 2.0, 1e6);
  }
  out.theta = theta;
  return out;
}

Oversampled smote_oversample(const MatrixX<double>& X, const VectorX<double>& y, std::size_t k, double ratio,
                             std::uint64_t seed) {
  if (k == 0) throw ConfigError("SMOTE needs k >= 1");
  if (!(ratio > 0.0)) throw ConfigError("SMOTE ratio must be positive");
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) > 0.5 ? pos : neg).push_back(i);
  const auto& minority = pos.size() <= neg.size() ? pos : neg;
  const auto& majority = pos.size() <= neg.size() ? neg : pos;
  const double minority_label = pos.size() <= neg.size() ? 1.0 : 0.0;
  if (minority.size() <= k) {
    throw ConfigError("SMOTE: minority class has " + std::to_string(minority.size()) + " rows; use k < " +
                      std::to_string(minority.size()));
  }
  const auto wanted = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(majority.size()) - 1e-9));
  const std::size_t n_new = wanted > minority.size() ? wanted - minority.size() : 0;

  // k nearest minority neighbours of every minority row, ties by index
  std::vector<std::vector<Eigen::Index>> nearest(minority.size());
  for (std::size_t a = 0; a < minority.size(); ++a) {
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t b = 0; b < minority.size(); ++b) {
      if (a != b) dist.emplace_back((X.row(minority[a]) - X.row(minority[b])).squaredNorm(), b);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t j = 0; j < k; ++j) nearest[a].push_back(minority[dist[j].second]);
  }

  Oversampled out;
  out.synthetic = n_new;
  out.X.resize(X.rows() + static_cast<Eigen::Index>(n_new), X.cols());
  out.y.resize(y.size() + static_cast<Eigen::Index>(n_new));
  out.X.topRows(X.rows()) = X;
  out.y.head(y.size()) = y;
  Rng rng(seed);
  for (std::size_t j = 0; j < n_new; ++j) {
    const std::size_t a = j % minority.size();
    const Eigen::Index nn = nearest[a][rng.below(k)];
    const double u = rng.uniform();
    const auto row = X.rows() + static_cast<Eigen::Index>(j);
    out.X.row(row) = X.row(minority[a]) + u * (X.row(nn) - X.row(minority[a]));
    out.y(row) = minority_label;
  }
  return out;
}

Prediction predict(const LogitModel& model, const VectorX<double>& row) {
  if (row.size() != model.dimension()) {
    throw ConfigError("feature vector has " + std::to_string(row.size()) + " entries, model expects " +
                      std::to_string(model.dimension()));
  }
  VectorX<double> x = row;
  if (model.center.size() == x.size()) x = (x - model.center).cwiseQuotient(model.scale);
  Prediction p;
  p.probability = sigmoid(model.intercept + x.dot(model.weights));
  p.label = p.probability > model.decision_threshold ? 1 : 0;
  return p;
}

std::vector<Prediction> predict(const LogitModel& model, const MatrixX<double>& rows) {
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.push_back(predict(model, VectorX<double>(rows.row(i).transpose())));
  return out;
}

namespace {

struct Prepared {
  MatrixX<double> X;
  VectorX<double> y;
  VectorX<double> center, scale;
  std::size_t synthetic = 0;
};

Prepared prepare(const LagDesign& design, const TrainConfig& config) {
  require_both_classes(design.y);
  Prepared p;
  p.X = design.X;
  p.y = design.y;
  if (config.standardize) {
    const auto n = static_cast<double>(p.X.rows());
    p.center = p.X.colwise().mean().transpose();
    p.scale.resize(p.X.cols());
    for (Eigen::Index j = 0; j < p.X.cols(); ++j) {
      const double var = (p.X.col(j).array() - p.center(j)).square().sum() / n;
      p.scale(j) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    p.X = (p.X.rowwise() - p.center.transpose()).array().rowwise() / p.scale.transpose().array();
  }
  if (config.smote) {
    auto over = smote_oversample(p.X, p.y, config.smote_k, config.smote_ratio, config.seed);
    p.X = std::move(over.X);
    p.y = std::move(over.y);
    p.synthetic = over.synthetic;
  }
  return p;
}

LogitModel base_model(const LagDesign& design, const Prepared& p, const VectorX<double>& theta, EventType type) {
  LogitModel m;
  m.intercept = theta(0);
  m.weights = theta.tail(theta.size() - 1);
  m.features = design.features;
  m.eta = design.eta;
  m.delta = design.delta;
  m.event_type = type;
  m.center = p.center;
  m.scale = p.scale;
  return m;
}

}  // namespace

TrainedModel train_ridge_logit(const LagDesign& design, double lambda, const TrainConfig& config,
                               EventType event_type) {
  const auto p = prepare(design, config);
  auto fit = fit_ridge(p.X, p.y, lambda, config);
  TrainedModel out{base_model(design, p, fit.theta, event_type), std::move(fit.trace), p.synthetic};
  out.model.regularization = Regularization::Ridge;
  out.model.lambda = lambda;
  return out;
}

TrainedModel train_group_lasso_logit(const LagDesign& design, const GroupLassoPenalty& penalty,
                                     const TrainConfig& config, EventType event_type) {
  const auto p = prepare(design, config);
  auto fit = fit_group_lasso(p.X, p.y, lag_groups(design.features.size(), design.eta), penalty, config);
  TrainedModel out{base_model(design, p, fit.theta, event_type), std::move(fit.trace), p.synthetic};
  out.model.regularization = Regularization::GroupLasso;
  out.model.penalty = penalty;
  return out;
}

void write_logit_model(std::ostream& out, const LogitModel& m) {
  out << "# logit model\n";
  out << "event_type " << to_string(m.event_type) << '\n';
  out << "eta " << m.eta << '\n';
  out << "delta " << m.delta << '\n';
  out << "features";
  for (auto f : m.features) out << ' ' << to_string(f);
  out << '\n';
  if (m.regularization == Regularization::Ridge) {
    out << "regularization ridge\n";
    out << "lambda " << g17(m.lambda) << '\n';
  } else {
    out << "regularization group-lasso\n";
    out << "m " << g17(m.penalty.m) << '\n';
    out << "l " << g17(m.penalty.l) << '\n';
    out << "g " << g17(m.penalty.g) << '\n';
  }
  out << "decision_threshold " << g17(m.decision_threshold) << '\n';
  out << "standardized " << (m.center.size() == m.weights.size() ? 1 : 0) << '\n';
  out << "intercept " << g17(m.intercept) << '\n';
  LagDesign names;
  names.features = m.features;
  names.eta = m.eta;
  names.delta = m.delta;
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
    out << "weight " << names.column_name(i) << ' ' << g17(m.weights(i));
    if (m.center.size() == m.weights.size()) out << ' ' << g17(m.center(i)) << ' ' << g17(m.scale(i));
    out << '\n';
  }
}

LogitModel read_logit_model(std::istream& in) {
  LogitModel m;
  bool standardized = false;
  std::vector<double> w, c, s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "event_type") {
      std::string v;
      ss >> v;
      auto t = parse_event_type(v);
      if (!t) throw DataError("logit model: unknown event type '" + v + "'");
      m.event_type = *t;
    } else if (key == "eta") {
      ss >> m.eta;
    } else if (key == "delta") {
      ss >> m.delta;
    } else if (key == "features") {
      std::string v;
      while (ss >> v) {
        auto f = parse_feature_id(v);
        if (!f) throw DataError("logit model: unknown feature '" + v + "'");
        m.features.push_back(*f);
      }
    } else if (key == "regularization") {
      std::string v;
      ss >> v;
      m.regularization = v == "ridge" ? Regularization::Ridge : Regularization::GroupLasso;
    } else if (key == "lambda") {
      ss >> m.lambda;
    } else if (key == "m") {
      ss >> m.penalty.m;
    } else if (key == "l") {
      ss >> m.penalty.l;
    } else if (key == "g") {
      ss >> m.penalty.g;
    } else if (key == "decision_threshold") {
      ss >> m.decision_threshold;
    } else if (key == "standardized") {
      int v = 0;
      ss >> v;
      standardized = v != 0;
    } else if (key == "intercept") {
      ss >> m.intercept;
    } else if (key == "weight") {
      std::string name;
      double v = 0.0, cv = 0.0, sv = 1.0;
      if (!(ss >> name >> v)) throw DataError("logit model: bad weight line");
      if (standardized && !(ss >> cv >> sv)) throw DataError("logit model: weight line lacks standardisation");
      w.push_back(v);
      c.push_back(cv);
      s.push_back(sv);
    } else {
      throw DataError("logit model: unknown key '" + key + "'");
    }
  }
  const auto expected = m.features.size() * static_cast<std::size_t>(m.eta + 1);
  if (w.size() != expected) {
    throw DataError("logit model: " + std::to_string(w.size()) + " weights, expected " + std::to_string(expected));
  }
  m.weights = Eigen::Map<VectorX<double>>(w.data(), static_cast<Eigen::Index>(w.size()));
  if (standardized) {
    m.center = Eigen::Map<VectorX<double>>(c.data(), static_cast<Eigen::Index>(c.size()));
    m.scale = Eigen::Map<VectorX<double>>(s.data(), static_cast<Eigen::Index>(s.size()));
  }
  return m;
}

}  // namespace darkwatch
