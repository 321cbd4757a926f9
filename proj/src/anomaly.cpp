// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/anomaly.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace darkwatch {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MeasurementMatrix<double> assemble_matrix(std::span<const FeatureSeries* const> series, DayRange span) {
  if (series.empty()) throw DataError("measurement matrix needs at least one forum");
  MeasurementMatrix<double> m;
  m.feature = series.front()->feature;
  m.span = span;
  m.values.resize(static_cast<Eigen::Index>(span.size()), static_cast<Eigen::Index>(series.size()));
  for (std::size_t f = 0; f < series.size(); ++f) {
    const auto& s = *series[f];
    if (s.feature != m.feature) throw DataError("measurement matrix mixes features");
    if (!s.span.contains(span.first) || !s.span.contains(span.last)) {
      throw DataError("series " + std::string(to_string(s.feature)) + ":" + s.forum + " covers " +
                      format_range(s.span) + ", not " + format_range(span));
    }
    m.forums.push_back(s.forum);
    const auto offset = static_cast<std::size_t>(s.span.index_of(span.first));
    for (std::size_t t = 0; t < span.size(); ++t) {
      m.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f)) = s.values[offset + t];
    }
  }
  m.column_means = m.values.colwise().mean().transpose();
  return m;
}

std::size_t ResidualSeries::flagged() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1));
}

ResidualSeries spe_series(const SubspaceModel<double>& model, const MeasurementMatrix<double>& matrix) {
  ResidualSeries out;
  out.span = matrix.span;
  const VectorX<double> values = spe(model, matrix.values);
  out.spe.assign(values.data(), values.data() + values.size());
  for (auto& v : out.spe) v = std::max(v, 0.0);
  out.flags.assign(out.spe.size(), 0);
  return out;
}

double quantile_threshold(std::span<const double> training, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("anomaly quantile must lie in (0, 1)");
  if (training.empty()) throw DegenerateError("no training SPE values for the quantile threshold");
  std::vector<double> sorted(training.begin(), training.end());
  std::sort(sorted.begin(), sorted.end());
  auto pos = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  pos = std::clamp<std::size_t>(pos, 1, sorted.size());
  return sorted[pos - 1];
}

void flag_anomalies(ResidualSeries& series, const ThresholdSpec& spec, std::optional<DayRange> training) {
  if (spec.kind == ThresholdSpec::Kind::Absolute) {
    if (!(spec.value >= 0.0)) throw ConfigError("SPE threshold must be non-negative");
    series.threshold = spec.value;
  } else {
    std::vector<double> train;
    for (std::size_t i = 0; i < series.spe.size(); ++i) {
      if (!training || training->contains(series.span.at(i))) train.push_back(series.spe[i]);
    }
    series.threshold = quantile_threshold(train, spec.value);
  }
  series.flags.resize(series.spe.size());
  for (std::size_t i = 0; i < series.spe.size(); ++i) series.flags[i] = series.spe[i] > series.threshold ? 1 : 0;
}

double required_anomalies(double zeta) { return std::max(1.0, zeta / 7.0); }

std::size_t DailyPredictions::unpredictable() const {
  return static_cast<std::size_t>(std::count(predictable.begin(), predictable.end(), 0));
}

namespace {

void check_window(int eta, int delta) {
  if (eta < 0 || delta < 0) throw ConfigError("eta and delta must be non-negative");
}

// Window [t−η−δ, t−δ] as offsets into `span`, or nullopt when uncovered.
std::optional<std::pair<std::size_t, std::size_t>> window_of(DayRange span, Day t, int eta, int delta) {
  const Day lo = t - std::chrono::days(eta + delta);
  const Day hi = t - std::chrono::days(delta);
  if (!span.contains(lo) || !span.contains(hi)) return std::nullopt;
  return std::pair{static_cast<std::size_t>(span.index_of(lo)), static_cast<std::size_t>(span.index_of(hi))};
}

}  // namespace

DailyPredictions predict_attacks_unsupervised(const ResidualSeries& flags, DayRange target, int eta, int delta,
                                              double zeta) {
  check_window(eta, delta);
  const double need = required_anomalies(zeta);
  DailyPredictions out;
  out.span = target;
  out.predicted.assign(target.size(), 0);
  out.predictable.assign(target.size(), 0);
  out.score.assign(target.size(), 0.0);
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto w = window_of(flags.span, target.at(i), eta, delta);
    if (!w) continue;
    out.predictable[i] = 1;
    std::size_t n = 0;
    for (std::size_t j = w->first; j <= w->second; ++j) n += flags.flags[j] ? 1 : 0;
    out.score[i] = static_cast<double>(n);
    out.predicted[i] = static_cast<double>(n) >= need ? 1 : 0;
  }
  return out;
}

DailyPredictions window_scores(const ResidualSeries& series, DayRange target, int eta, int delta, double zeta) {
  check_window(eta, delta);
  const auto k = static_cast<std::size_t>(std::ceil(required_anomalies(zeta) - 1e-12));
  DailyPredictions out;
  out.span = target;
  out.predicted.assign(target.size(), 0);
  out.predictable.assign(target.size(), 0);
  out.score.assign(target.size(), 0.0);
  std::vector<double> window;
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto w = window_of(series.span, target.at(i), eta, delta);
    if (!w) continue;
    out.predictable[i] = 1;
    window.assign(series.spe.begin() + static_cast<std::ptrdiff_t>(w->first),
                  series.spe.begin() + static_cast<std::ptrdiff_t>(w->second + 1));
    if (k > window.size()) {
      // the rule can never fire; rank below every real SPE
      out.score[i] = -1.0;
    } else {
      std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(k - 1), window.end(),
                       std::greater<>());
      out.score[i] = window[k - 1];
    }
    out.predicted[i] = out.score[i] > series.threshold ? 1 : 0;
  }
  return out;
}

void write_subspace_model(std::ostream& out, const SubspaceModel<double>& model, std::span<const std::string> forums,
                          std::optional<double> threshold) {
  out << "# subspace model\n";
  out << "feature " << to_string(model.feature) << '\n';
  out << "columns " << model.columns() << '\n';
  out << "components " << model.axes.cols() << '\n';
  out << "normal " << model.r << '\n';
  out << "forums";
  for (const auto& f : forums) out << ' ' << f;
  out << '\n';
  out << "means";
  for (Eigen::Index i = 0; i < model.means.size(); ++i) out << ' ' << g17(model.means(i));
  out << '\n';
  out << "variances";
  for (Eigen::Index i = 0; i < model.variances.size(); ++i) out << ' ' << g17(model.variances(i));
  out << '\n';
  for (Eigen::Index k = 0; k < model.axes.cols(); ++k) {
    out << "axis " << k + 1;
    for (Eigen::Index i = 0; i < model.axes.rows(); ++i) out << ' ' << g17(model.axes(i, k));
    out << '\n';
  }
  if (threshold) out << "threshold " << g17(*threshold) << '\n';
}

LoadedSubspaceModel read_subspace_model(std::istream& in) {
  LoadedSubspaceModel out;
  Eigen::Index columns = -1, components = -1;
  std::string line;
  auto read_values = [](std::istringstream& ss, Eigen::Index n, const std::string& what) {
    VectorX<double> v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(ss >> v(i))) throw DataError("subspace model: short " + what + " line");
    }
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "feature") {
      std::string name;
      ss >> name;
      auto id = parse_feature_id(name);
      if (!id) throw DataError("subspace model: unknown feature '" + name + "'");
      out.model.feature = *id;
    } else if (key == "columns") {
      ss >> columns;
    } else if (key == "components") {
      ss >> components;
    } else if (key == "normal") {
      ss >> out.model.r;
    } else if (key == "forums") {
      std::string f;
      while (ss >> f) out.forums.push_back(f);
    } else if (key == "means" || key == "variances" || key == "axis") {
      if (columns < 0 || components < 0) throw DataError("subspace model: dimensions must precede values");
      if (key == "means") {
        out.model.means = read_values(ss, columns, key);
      } else if (key == "variances") {
        out.model.variances = read_values(ss, components, key);
      } else {
        Eigen::Index k = 0;
        ss >> k;
        if (k < 1 || k > components) throw DataError("subspace model: axis index out of range");
        if (out.model.axes.size() == 0) out.model.axes = MatrixX<double>::Zero(columns, components);
        out.model.axes.col(k - 1) = read_values(ss, columns, key);
      }
    } else if (key == "threshold") {
      double t = 0.0;
      ss >> t;
      out.threshold = t;
    } else {
      throw DataError("subspace model: unknown key '" + key + "'");
    }
  }
  if (columns < 0 || out.model.means.size() != columns || out.model.axes.cols() != components) {
    throw DataError("subspace model: incomplete file");
  }
  return out;
}

}  // namespace darkwatch
