// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/experts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>

#include "darkwatch/error.hpp"
#include "darkwatch/random.hpp"

namespace darkwatch {

std::vector<const Post*> posts_in(const Forum& forum, DayRange window) {
  std::vector<const Post*> out;
  const Timestamp lo{window.first};
  const Timestamp hi{window.last + std::chrono::days{1}};
  for (const auto& thread : forum.threads) {
    auto first = std::lower_bound(thread.posts.begin(), thread.posts.end(), lo,
                                  [](const Post& p, Timestamp t) { return p.timestamp < t; });
    for (auto it = first; it != thread.posts.end() && it->timestamp < hi; ++it) out.push_back(&*it);
  }
  return out;
}

std::vector<std::string> CpeGroupRanking::top() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < top_k; ++i) out.push_back(ranked[i].first);
  std::sort(out.begin(), out.end());
  return out;
}

CpeGroupRanking rank_cpe_groups(std::span<const Post* const> posts, const CpeMap& cpe, DayRange window,
                                std::size_t top_k) {
  std::map<std::string, std::size_t> sums;
  for (const Post* p : posts) {
    for (const auto& cve : p->cve_mentions) {
      if (const auto* groups = cpe.lookup(cve)) {
        for (const auto& g : *groups) ++sums[g];
      }
    }
  }
  CpeGroupRanking ranking;
  ranking.window = window;
  ranking.top_k = top_k;
  ranking.ranked.assign(sums.begin(), sums.end());
  std::stable_sort(ranking.ranked.begin(), ranking.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranking;
}

std::string_view to_string(CpeRelation r) {
  switch (r) {
    case CpeRelation::SubsetOfTop:
      return "subset";
    case CpeRelation::SupersetOfTop:
      return "superset";
    case CpeRelation::EqualsTop:
      return "equal";
  }
  return "unknown";
}

namespace {

std::optional<CpeRelation> relate(const std::vector<std::string>& theta, const std::vector<std::string>& top,
                                  std::size_t top_k) {
  auto subset = [](const auto& a, const auto& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); };
  if (theta.size() < top_k) {
    if (subset(theta, top)) return CpeRelation::SubsetOfTop;
  } else if (theta.size() > top_k) {
    if (subset(top, theta)) return CpeRelation::SupersetOfTop;
  } else if (theta == top) {
    return CpeRelation::EqualsTop;
  }
  return std::nullopt;
}

}  // namespace

std::vector<UserAssessment> assess_users(const ReplyGraph& history, std::span<const Post* const> posts,
                                         const CpeMap& cpe, const CpeGroupRanking& ranking,
                                         std::size_t indeg_threshold) {
  std::map<UserId, UserAssessment> by_user;
  for (const Post* p : posts) {
    if (p->cve_mentions.empty()) continue;
    auto& a = by_user[p->user];
    a.user = p->user;
    a.cve_mentions += p->cve_mentions.size();
    for (const auto& cve : p->cve_mentions) {
      if (const auto* groups = cpe.lookup(cve)) a.groups.insert(a.groups.end(), groups->begin(), groups->end());
    }
  }
  const auto top = ranking.top();
  std::vector<UserAssessment> out;
  out.reserve(by_user.size());
  for (auto& [user, a] : by_user) {
    std::sort(a.groups.begin(), a.groups.end());
    a.groups.erase(std::unique(a.groups.begin(), a.groups.end()), a.groups.end());
    a.relation = relate(a.groups, top, ranking.top_k);
    a.in_degree = history.in_degree(user);
    a.meets_indegree = a.in_degree >= indeg_threshold;
    out.push_back(std::move(a));
  }
  return out;
}

bool ExpertSet::contains(UserId u) const {
  auto it = std::lower_bound(members.begin(), members.end(), u,
                             [](const UserAssessment& a, UserId key) { return a.user < key; });
  return it != members.end() && it->user == u;
}

std::vector<UserId> ExpertSet::users() const {
  std::vector<UserId> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m.user);
  return out;
}

ExpertSet extract_experts(const ReplyGraph& history, std::span<const Post* const> posts, const CpeMap& cpe,
                          const CpeGroupRanking& ranking, std::size_t indeg_threshold) {
  ExpertSet set;
  set.window = ranking.window;
  set.indeg_threshold = indeg_threshold;
  for (auto& a : assess_users(history, posts, cpe, ranking, indeg_threshold)) {
    if (a.is_expert()) set.members.push_back(std::move(a));
  }
  return set;
}

std::vector<UserId> alternate_users(std::span<const UserAssessment> assessments) {
  std::vector<UserId> out;
  for (const auto& a : assessments) {
    if (!a.is_expert()) out.push_back(a.user);
  }
  return out;
}

std::vector<double> interaction_degrees(const ReplyGraph& graph, std::span<const UserId> users) {
  std::vector<double> out;
  out.reserve(users.size());
  for (auto u : users) out.push_back(static_cast<double>(graph.in_degree(u) + graph.out_degree(u)));
  return out;
}

std::vector<double> sample_alternates(std::span<const double> pool, std::size_t n, std::uint64_t seed) {
  std::vector<double> values(pool.begin(), pool.end());
  Rng rng(seed);
  rng.shuffle(values);
  if (values.size() > n) values.resize(n);
  std::sort(values.begin(), values.end());
  return values;
}

namespace {

std::pair<double, double> mean_var(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  double var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  return {mean, var};
}

}  // namespace

TTestResult expert_interaction_ttest(std::span<const double> expert, std::span<const double> alternate, double alpha,
                                     TTestVariant variant) {
  if (expert.empty() || alternate.empty()) throw ConfigError("t-test needs two non-empty samples");
  const auto [m1, v1] = mean_var(expert);
  const auto [m2, v2] = mean_var(alternate);
  const double n1 = static_cast<double>(expert.size());
  const double n2 = static_cast<double>(alternate.size());

  TTestResult r;
  double se2;
  if (variant == TTestVariant::Welch) {
    se2 = v1 / n1 + v2 / n2;
    double denom = (n1 > 1 ? (v1 / n1) * (v1 / n1) / (n1 - 1) : 0.0) + (n2 > 1 ? (v2 / n2) * (v2 / n2) / (n2 - 1) : 0.0);
    r.df = denom > 0.0 ? se2 * se2 / denom : n1 + n2 - 2;
  } else {
    r.df = n1 + n2 - 2;
    double pooled = r.df > 0 ? ((n1 - 1) * v1 + (n2 - 1) * v2) / r.df : 0.0;
    se2 = pooled * (1.0 / n1 + 1.0 / n2);
  }

  const double diff = m1 - m2;
  if (se2 <= 0.0) {
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.p_value = diff == 0.0 ? 0.5 : (diff > 0.0 ? 0.0 : 1.0);
  } else {
    r.t = diff / std::sqrt(se2);
    if (r.df <= 0.0) r.df = 1.0;
    boost::math::students_t dist(r.df);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.t));
  }
  r.reject = r.p_value < alpha;
  return r;
}

void write_experts(std::ostream& out, const ExpertSet& experts, const UserTable& users, const std::string& forum_id,
                   const std::string& window_label) {
  for (const auto& m : experts.members) {
    out << window_label << '\t' << forum_id << '\t' << users.name(m.user) << '\t' << m.in_degree << '\t'
        << to_string(*m.relation) << '\n';
  }
}

}  // namespace darkwatch
