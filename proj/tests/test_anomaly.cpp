// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <vector>

#include "darkwatch/anomaly.hpp"
#include "darkwatch/random.hpp"
#include "support.hpp"

using namespace darkwatch;
using namespace darkwatch::testing;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal() * static_cast<double>(j + 1);
  }
  return m;
}

ResidualSeries series_of(Day first, std::vector<double> spe, double threshold) {
  ResidualSeries s;
  s.span = DayRange{first, first + std::chrono::days(static_cast<int>(spe.size()) - 1)};
  s.spe = std::move(spe);
  flag_anomalies(s, ThresholdSpec{ThresholdSpec::Kind::Absolute, threshold});
  return s;
}

}  // namespace

TEST_CASE("projection identities on random matrices") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd Y = random_matrix(rng, 50, 8);
    const auto model = fit_subspace(Y, 8, 3);
    const Eigen::MatrixXd C = model.normal_projector();
    const Eigen::MatrixXd Ct = model.residual_projector();
    CHECK((C * C - C).norm() < 1e-9);
    CHECK((C + Ct - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-9);
    CHECK((model.axes.transpose() * model.axes - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-9);
    for (Eigen::Index k = 1; k < 8; ++k) CHECK(model.variances(k) <= model.variances(k - 1) + 1e-12);
    const auto s = spe(model, Y);
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
      const Eigen::VectorXd yc = Y.row(i).transpose() - model.means;
      const double norm = yc.squaredNorm();
      const double hat = (C * yc).squaredNorm();
      const double tilde = (Ct * yc).squaredNorm();
      CHECK(std::abs(hat + tilde - norm) < 1e-9 * std::max(1.0, norm));
      CHECK(std::abs(s(i) - tilde) < 1e-9 * std::max(1.0, norm));
    }
  }
}

TEST_CASE("duplicate columns leave no residual when r covers the rank") {
  Rng rng(2);
  Eigen::MatrixXd base = random_matrix(rng, 40, 2);
  Eigen::MatrixXd Y(40, 4);
  Y << base, base;
  const auto model = fit_subspace(Y, 4, 2);
  CHECK(spe(model, Y).maxCoeff() < 1e-10);
}

TEST_CASE("hand principal axes with the sign convention") {
  Eigen::MatrixXd Y(3, 2);
  Y << 1, 0, 0, 1, -1, 0;
  // centred columns: (1, 0, -1) and (-1/3, 2/3, -1/3), orthogonal, so the
  // axes are e1 (variance 1) then e2 (variance 1/3)
  const auto model = fit_subspace(Y, 2, 1);
  CHECK(model.means(0) == doctest::Approx(0.0));
  CHECK(model.means(1) == doctest::Approx(1.0 / 3));
  CHECK(model.axes(0, 0) == doctest::Approx(1.0));
  CHECK(model.axes(1, 0) == doctest::Approx(0.0));
  CHECK(model.axes(1, 1) == doctest::Approx(1.0));
  CHECK(model.variances(0) == doctest::Approx(1.0));
  CHECK(model.variances(1) == doctest::Approx(1.0 / 3));
  const auto s = spe(model, Y);
  CHECK(s(1) == doctest::Approx(4.0 / 9));
}

TEST_CASE("fit arguments are validated") {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Random(10, 3);
  CHECK_THROWS_AS(fit_subspace(Y, 4, 1), ConfigError);
  CHECK_THROWS_AS(fit_subspace(Y, 3, 3), ConfigError);
  CHECK_THROWS_AS(fit_subspace(Eigen::MatrixXd(Y.topRows(1)), 3, 1), DegenerateError);
}

TEST_CASE("quantile threshold is the ceil(q n)-th order statistic") {
  const std::vector<double> v{5, 1, 9, 3, 7, 2, 8, 4, 10, 6};
  CHECK(quantile_threshold(v, 0.9) == 9.0);
  CHECK(quantile_threshold(v, 0.95) == 10.0);
  CHECK(quantile_threshold(v, 0.05) == 1.0);
}

TEST_CASE("a quantile threshold resolves on the training span only") {
  const Day d0 = day("2016-01-01");
  ResidualSeries s;
  s.spe = {1, 2, 3, 4, 100, 200};
  s.span = DayRange{d0, d0 + std::chrono::days(5)};
  flag_anomalies(s, ThresholdSpec{ThresholdSpec::Kind::Quantile, 0.75}, DayRange{d0, d0 + std::chrono::days(3)});
  CHECK(s.threshold == 3.0);
  CHECK(s.flags == std::vector<char>{0, 0, 0, 1, 1, 1});
  CHECK(s.flagged() == 3);
}

TEST_CASE("required anomalies") {
  CHECK(required_anomalies(1) == 1.0);
  CHECK(required_anomalies(7) == 1.0);
  CHECK(required_anomalies(14) == 2.0);
  CHECK(required_anomalies(28) == 4.0);
}

TEST_CASE("attack rule examples") {
  const Day d0 = day("2016-01-01");
  // flags on days 2 and 4
  const auto s = series_of(d0, {0, 0, 1, 0, 1, 0, 0, 0, 0, 0}, 0.5);
  const DayRange target{d0, d0 + std::chrono::days(9)};
  SUBCASE("one flag suffices at zeta 7") {
    const auto p = predict_attacks_unsupervised(s, target, 2, 1, 7);
    // window [t-3, t-1]
    CHECK(p.predictable == std::vector<char>{0, 0, 0, 1, 1, 1, 1, 1, 1, 1});
    CHECK(p.predicted == std::vector<int>{0, 0, 0, 1, 1, 1, 1, 1, 0, 0});
    CHECK(p.unpredictable() == 3);
  }
  SUBCASE("two flags needed at zeta 14") {
    const auto p = predict_attacks_unsupervised(s, target, 2, 1, 14);
    CHECK(p.predicted == std::vector<int>{0, 0, 0, 0, 0, 1, 0, 0, 0, 0});
  }
}

TEST_CASE("window scores reproduce the rule at the flag threshold") {
  Rng rng(4);
  const Day d0 = day("2016-01-01");
  std::vector<double> v(120);
  for (auto& x : v) x = rng.uniform() < 0.2 ? 5 + rng.uniform() : rng.uniform();
  const auto s = series_of(d0, v, 2.0);
  const DayRange target{d0 + std::chrono::days(20), d0 + std::chrono::days(119)};
  for (double zeta : {1.0, 7.0, 14.0, 28.0}) {
    const auto rule = predict_attacks_unsupervised(s, target, 7, 1, zeta);
    const auto scores = window_scores(s, target, 7, 1, zeta);
    for (std::size_t i = 0; i < target.size(); ++i) {
      CHECK(rule.predicted[i] == (scores.score[i] > s.threshold ? 1 : 0));
    }
  }
}

TEST_CASE("raising the threshold never adds predictions") {
  Rng rng(6);
  const Day d0 = day("2016-01-01");
  std::vector<double> v(90);
  for (auto& x : v) x = rng.uniform();
  const DayRange target{d0 + std::chrono::days(10), d0 + std::chrono::days(89)};
  std::size_t previous = SIZE_MAX;
  for (double th : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto p = predict_attacks_unsupervised(series_of(d0, v, th), target, 7, 1, 7);
    const auto count = static_cast<std::size_t>(std::count(p.predicted.begin(), p.predicted.end(), 1));
    CHECK(count <= previous);
    previous = count;
  }
}

TEST_CASE("subspace model round-trips") {
  Rng rng(8);
  const Eigen::MatrixXd Y = random_matrix(rng, 30, 4);
  const auto model = fit_subspace(Y, 4, 2);
  std::ostringstream out;
  const std::vector<std::string> forums{"a", "b", "c", "d"};
  write_subspace_model(out, model, forums, 1.5);
  std::istringstream in(out.str());
  const auto back = read_subspace_model(in);
  CHECK(back.forums == forums);
  CHECK(back.threshold == 1.5);
  CHECK(back.model.r == 2);
  CHECK((back.model.axes - model.axes).norm() == 0.0);
  CHECK((back.model.means - model.means).norm() == 0.0);
}
