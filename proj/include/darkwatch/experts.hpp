// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "darkwatch/corpus.hpp"
#include "darkwatch/reply_graph.hpp"

namespace darkwatch {

/// Posts of `forum` whose day lies in `window`, in thread order.
std::vector<const Post*> posts_in(const Forum& forum, DayRange window);

struct CpeGroupRanking {
  DayRange window{};
  /// (group, summed CVE mentions), counts non-increasing, ties lexicographic.
  std::vector<std::pair<std::string, std::size_t>> ranked;
  std::size_t top_k = 5;

  /// The first top_k groups, sorted by name.
  [[nodiscard]] std::vector<std::string> top() const;
};

/// Every CVE mention adds one to each CPE group the CVE belongs to.
/// Unmapped CVEs contribute nothing.
CpeGroupRanking rank_cpe_groups(std::span<const Post* const> posts, const CpeMap& cpe, DayRange window,
                                std::size_t top_k = 5);

enum class CpeRelation {
  SubsetOfTop,    // θ(u) ⊆ top
  SupersetOfTop,  // top ⊆ θ(u)
  EqualsTop,      // θ(u) = top; only way to qualify at |θ(u)| = top_k
};

std::string_view to_string(CpeRelation r);

/// Constraint evaluation for one user with at least one CVE mention.
struct UserAssessment {
  UserId user;
  std::size_t cve_mentions = 0;
  std::vector<std::string> groups;       // θ(u), sorted
  std::optional<CpeRelation> relation;   // empty when constraint 2 fails
  std::size_t in_degree = 0;
  bool meets_indegree = false;

  [[nodiscard]] bool is_expert() const { return relation.has_value() && meets_indegree; }
};

/// One assessment per user that mentioned a CVE in `posts`, sorted by user.
std::vector<UserAssessment> assess_users(const ReplyGraph& history, std::span<const Post* const> posts,
                                         const CpeMap& cpe, const CpeGroupRanking& ranking,
                                         std::size_t indeg_threshold);

struct ExpertSet {
  DayRange window{};
  std::size_t indeg_threshold = 10;
  std::vector<UserAssessment> members;  // sorted by user

  [[nodiscard]] bool contains(UserId u) const;
  [[nodiscard]] std::vector<UserId> users() const;
  [[nodiscard]] std::size_t size() const { return members.size(); }
  [[nodiscard]] bool empty() const { return members.empty(); }
};

/// Users that mentioned a CVE in the history window, whose CPE groups sit
/// inside (or, for broad users, cover) the top groups, and whose in-degree in
/// the historical network reaches `indeg_threshold`.
ExpertSet extract_experts(const ReplyGraph& history, std::span<const Post* const> posts, const CpeMap& cpe,
                          const CpeGroupRanking& ranking, std::size_t indeg_threshold = 10);

/// Users that mentioned a CVE but failed constraint 2 or 3.
std::vector<UserId> alternate_users(std::span<const UserAssessment> assessments);

/// In-degree plus out-degree of each user in `graph` (zero when absent).
std::vector<double> interaction_degrees(const ReplyGraph& graph, std::span<const UserId> users);

/// Draws `n` values without replacement (all of them when the pool is
/// smaller) and returns them sorted ascending.
std::vector<double> sample_alternates(std::span<const double> pool, std::size_t n, std::uint64_t seed);

enum class TTestVariant { Welch, Pooled };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 0.5;  // one-sided, H1: mean(expert) > mean(alternate)
  bool reject = false;
};

TTestResult expert_interaction_ttest(std::span<const double> expert, std::span<const double> alternate,
                                     double alpha = 0.01, TTestVariant variant = TTestVariant::Welch);

/// `window<TAB>forum<TAB>user<TAB>indeg<TAB>relation` per member.
void write_experts(std::ostream& out, const ExpertSet& experts, const UserTable& users, const std::string& forum_id,
                   const std::string& window_label);

}  // namespace darkwatch
