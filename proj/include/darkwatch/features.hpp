// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "darkwatch/corpus.hpp"
#include "darkwatch/experts.hpp"
#include "darkwatch/graph_metrics.hpp"
#include "darkwatch/reply_graph.hpp"

namespace darkwatch {

enum class FeatureId {
  Conductance,
  ShortestPath,
  ExpertReplies,
  CommonCommunities,
  NThreads,
  NUsers,
  NExpertThreads,
  NCveMentions,
};

inline constexpr FeatureId kAllFeatures[] = {
    FeatureId::Conductance, FeatureId::ShortestPath, FeatureId::ExpertReplies,  FeatureId::CommonCommunities,
    FeatureId::NThreads,    FeatureId::NUsers,       FeatureId::NExpertThreads, FeatureId::NCveMentions,
};

std::string_view to_string(FeatureId id);
std::optional<FeatureId> parse_feature_id(std::string_view text);
/// True for the four features evaluated on the merged reply network.
bool is_graph_feature(FeatureId id);

struct MetadataCounts {
  std::size_t threads = 0;
  std::size_t users = 0;
  std::size_t expert_threads = 0;
  std::size_t cve_mentions = 0;  // distinct CVE ids
};

/// Counts over the posts of one forum-day.
MetadataCounts metadata_features(std::span<const Post* const> day_posts, const ExpertSet& experts);

struct FeatureSeries {
  FeatureId feature = FeatureId::Conductance;
  std::string forum;
  DayRange span{};
  std::vector<double> values;
  std::vector<Coverage> coverage;
};

struct FeatureParams {
  ConstructionParams construction;
  std::size_t indeg_threshold = 10;
  std::size_t top_k = 5;
  WalkMode walk = WalkMode::UndirectedDegree;
  RepliesAggregate replies = RepliesAggregate::Mean;
  /// Conductance target set: users active on the day (true) or every
  /// non-expert vertex of the merged network (false).
  bool conductance_day_targets = true;
  std::uint64_t seed = 0;
};

/// One series per requested feature over schedule.study_span(). For each
/// subsequence window the historical network, experts and communities are
/// built once; each day then merges its own network into the history.
std::vector<FeatureSeries> compute_feature_series(const Forum& forum, const CpeMap& cpe,
                                                  const WindowSchedule& schedule, const FeatureParams& params,
                                                  std::span<const FeatureId> features);

/// Every (feature, forum) series on a common day span, ordered feature-major
/// in the order features were requested and forum id within a feature.
struct FeatureTable {
  DayRange span{};
  std::vector<FeatureSeries> series;

  [[nodiscard]] const FeatureSeries* find(FeatureId feature, std::string_view forum) const;
  [[nodiscard]] std::vector<const FeatureSeries*> of(FeatureId feature) const;
  [[nodiscard]] std::vector<FeatureId> features() const;
};

/// Runs compute_feature_series for every forum, with up to `threads` forums
/// in flight. Output does not depend on `threads`.
FeatureTable compute_feature_table(const Corpus& corpus, const CpeMap& cpe, const WindowSchedule& schedule,
                                   const FeatureParams& params, std::span<const FeatureId> features,
                                   unsigned threads = 1);

/// Wide CSV: `day,<feature>:<forum>,...`, one row per day.
void write_feature_csv(std::ostream& out, const FeatureTable& table);
/// Same layout with coverage names instead of values.
void write_flag_csv(std::ostream& out, const FeatureTable& table);
/// Reads a value CSV and, when given, the matching flag CSV.
FeatureTable read_feature_csv(std::istream& values, std::istream* flags = nullptr);

}  // namespace darkwatch
