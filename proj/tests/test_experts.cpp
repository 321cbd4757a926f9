// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "darkwatch/experts.hpp"
#include "support.hpp"

using namespace darkwatch;
using namespace darkwatch::testing;

namespace {

struct Fixture {
  Names names;
  std::vector<Post> posts;
  CpeMap cpe;
  const Day d = day("2016-01-10");

  void mention(const std::string& user, std::vector<std::string> cves) {
    Post p;
    p.forum_id = "f";
    p.thread_id = "h";
    p.post_id = static_cast<std::int64_t>(posts.size()) + 1;
    p.user = names(user);
    p.timestamp = minutes_after(d, static_cast<std::int64_t>(posts.size()));
    p.cve_mentions = std::move(cves);
    posts.push_back(std::move(p));
  }

  std::vector<const Post*> pointers() const {
    std::vector<const Post*> out;
    for (const auto& p : posts) out.push_back(&p);
    return out;
  }

  DayRange window() const { return DayRange{d, d}; }
};

// `count` distinct repliers pointing at `target`.
std::vector<ReplyEdge> fan_in(Names& names, const std::string& target, std::size_t count) {
  std::vector<ReplyEdge> out;
  const Timestamp t0{day("2016-01-10")};
  for (std::size_t i = 0; i < count; ++i) out.push_back({names(target + "_r" + std::to_string(i)), names(target), t0});
  return out;
}

ReplyGraph history_of(Names& names, std::vector<std::pair<std::string, std::size_t>> fans) {
  std::vector<ReplyEdge> edges;
  for (const auto& [u, k] : fans) {
    auto e = fan_in(names, u, k);
    edges.insert(edges.end(), e.begin(), e.end());
  }
  return ReplyGraph({}, edges, DayRange{day("2016-01-10"), day("2016-01-10")});
}

// One-sided upper tail of Student's t by Simpson integration of the density.
double t_upper_tail(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int n = 200000;
  const double h = t / n;
  double s = pdf(0) + pdf(t);
  for (int i = 1; i < n; ++i) s += pdf(i * h) * (i % 2 ? 4 : 2);
  return 0.5 - s * h / 3;
}

}  // namespace

TEST_CASE("groups rank by summed mentions with multi-membership") {
  Fixture f;
  f.cpe.add("CVE-a", {"A"});
  f.cpe.add("CVE-b", {"B"});
  f.cpe.add("CVE-c", {"C"});
  f.cpe.add("CVE-m", {"M1", "M2"});
  for (int i = 0; i < 10; ++i) f.mention("u", {"CVE-a"});
  for (int i = 0; i < 5; ++i) f.mention("u", {"CVE-b"});
  f.mention("u", {"CVE-c", "CVE-unmapped"});
  for (int i = 0; i < 3; ++i) f.mention("v", {"CVE-m"});
  const auto ptrs = f.pointers();
  const auto r = rank_cpe_groups(ptrs, f.cpe, f.window(), 2);
  CHECK(r.top() == std::vector<std::string>{"A", "B"});
  REQUIRE(r.ranked.size() == 5);
  CHECK(r.ranked[2] == std::pair<std::string, std::size_t>{"M1", 3});
  CHECK(r.ranked[3] == std::pair<std::string, std::size_t>{"M2", 3});
  CHECK(r.ranked[4] == std::pair<std::string, std::size_t>{"C", 1});
  CHECK(rank_cpe_groups(std::vector<const Post*>{}, f.cpe, f.window()).ranked.empty());
}

TEST_CASE("expert constraints") {
  Fixture f;
  for (const char* g : {"A", "B", "C", "D", "E", "G"}) f.cpe.add(std::string("CVE-") + g, {g});
  // A..E lead the ranking, G trails
  for (const char* g : {"A", "B", "C", "D", "E"}) {
    for (int i = 0; i < 4; ++i) f.mention("bulk", {std::string("CVE-") + g});
  }
  f.mention("good", {"CVE-A"});
  f.mention("weak", {"CVE-A"});
  f.mention("offtop", {"CVE-G"});
  f.mention("broad", {"CVE-A", "CVE-B", "CVE-C", "CVE-D", "CVE-E", "CVE-G"});
  f.mention("exact", {"CVE-A", "CVE-B", "CVE-C", "CVE-D", "CVE-E"});
  const auto ptrs = f.pointers();
  const auto ranking = rank_cpe_groups(ptrs, f.cpe, f.window(), 5);
  CHECK(ranking.top() == std::vector<std::string>{"A", "B", "C", "D", "E"});
  const auto history =
      history_of(f.names, {{"good", 12}, {"weak", 9}, {"offtop", 15}, {"broad", 10}, {"exact", 11}, {"bulk", 0}});
  const auto experts = extract_experts(history, ptrs, f.cpe, ranking, 10);
  std::vector<std::string> got;
  for (auto u : experts.users()) got.push_back(f.names.users.name(u));
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::string>{"broad", "exact", "good"});
  const auto assessed = assess_users(history, ptrs, f.cpe, ranking, 10);
  const auto alternates = alternate_users(assessed);
  std::vector<std::string> alt;
  for (auto u : alternates) alt.push_back(f.names.users.name(u));
  std::sort(alt.begin(), alt.end());
  CHECK(alt == std::vector<std::string>{"bulk", "offtop", "weak"});
}

TEST_CASE("raising the in-degree threshold never grows the expert set") {
  Fixture f;
  f.cpe.add("CVE-a", {"A"});
  std::vector<std::pair<std::string, std::size_t>> fans;
  for (std::size_t i = 0; i < 30; ++i) {
    const std::string u = "u" + std::to_string(i);
    f.mention(u, {"CVE-a"});
    fans.emplace_back(u, i);
  }
  const auto ptrs = f.pointers();
  const auto ranking = rank_cpe_groups(ptrs, f.cpe, f.window());
  const auto history = history_of(f.names, fans);
  std::size_t previous = SIZE_MAX;
  for (std::size_t th : {0, 5, 10, 20, 29, 30}) {
    const auto e = extract_experts(history, ptrs, f.cpe, ranking, th);
    CHECK(e.size() <= previous);
    CHECK(e.size() == (th == 0 ? 30 : 30 - th));
    previous = e.size();
  }
}

TEST_CASE("t-test on identical samples has p = 0.5") {
  const std::vector<double> a{1, 2, 3};
  const auto r = expert_interaction_ttest(a, a);
  CHECK(r.t == doctest::Approx(0.0));
  CHECK(r.p_value == doctest::Approx(0.5));
  CHECK_FALSE(r.reject);
}

TEST_CASE("Welch and pooled statistics match hand values") {
  const std::vector<double> e{50, 40, 30}, a{5, 4, 3};
  // means 40 and 4, variances 100 and 1
  const double t = 36.0 / std::sqrt(101.0 / 3.0);
  const double df = std::pow(101.0 / 3.0, 2) / (std::pow(100.0 / 3.0, 2) / 2 + std::pow(1.0 / 3.0, 2) / 2);
  const auto welch = expert_interaction_ttest(e, a, 0.01, TTestVariant::Welch);
  CHECK(welch.t == doctest::Approx(t).epsilon(1e-12));
  CHECK(welch.df == doctest::Approx(df).epsilon(1e-12));
  CHECK(welch.p_value == doctest::Approx(t_upper_tail(t, df)).epsilon(1e-6));
  CHECK_FALSE(welch.reject);  // p is about 0.012
  CHECK(expert_interaction_ttest(e, a, 0.05, TTestVariant::Welch).reject);

  const auto pooled = expert_interaction_ttest(e, a, 0.01, TTestVariant::Pooled);
  CHECK(pooled.t == doctest::Approx(t).epsilon(1e-12));  // equal group sizes
  CHECK(pooled.df == doctest::Approx(4.0));
  CHECK(pooled.p_value == doctest::Approx(t_upper_tail(t, 4.0)).epsilon(1e-6));
  CHECK(pooled.reject);
}

TEST_CASE("alternate sampling is seeded and without replacement") {
  const std::vector<double> pool{9, 1, 8, 2, 7, 3};
  const auto s1 = sample_alternates(pool, 4, 42);
  CHECK(s1 == sample_alternates(pool, 4, 42));
  CHECK(s1.size() == 4);
  CHECK(std::is_sorted(s1.begin(), s1.end()));
  std::vector<double> all = sample_alternates(pool, 10, 1);
  CHECK(all == std::vector<double>{1, 2, 3, 7, 8, 9});
}

TEST_CASE("interaction degree is in plus out degree") {
  Names n;
  auto g = graph(n, {{"a", "b"}, {"b", "c"}, {"c", "b"}});
  CHECK(interaction_degrees(g, n.many({"a", "b", "c", "zz"})) == std::vector<double>{1, 3, 2, 0});
}
