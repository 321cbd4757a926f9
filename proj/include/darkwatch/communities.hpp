// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "darkwatch/reply_graph.hpp"

namespace darkwatch {

struct CommunityAssignment {
  std::vector<UserId> nodes;            // graph.vertices()
  std::vector<std::size_t> community;   // aligned with nodes; labels 0..count-1 by first appearance

  [[nodiscard]] std::optional<std::size_t> of(UserId u) const;
  [[nodiscard]] std::size_t count() const;
};

/// Louvain modularity optimisation on the undirected, unweighted projection.
/// Nodes are visited in a seed-shuffled order of the sorted vertex list, so a
/// fixed seed gives a fixed partition. Isolated nodes stay singletons.
CommunityAssignment louvain_communities(const ReplyGraph& graph, std::uint64_t seed = 0);

/// Newman modularity of `assignment` on the undirected simple projection.
double modularity(const ReplyGraph& graph, const CommunityAssignment& assignment);

/// Number of non-expert users active on the current day that share a
/// community with the experts: directly when they were already in the
/// historical network, otherwise through an incoming expert edge or an
/// in-neighbour from an expert community in the merged network. Each user
/// counts at most once.
std::size_t common_communities(std::span<const UserId> experts, const ReplyGraph& history,
                               const CommunityAssignment& communities, const ReplyGraph& current,
                               const ReplyGraph& merged);

class Adjacency;
/// Same, reusing an Adjacency already built for `merged`.
std::size_t common_communities(std::span<const UserId> experts, const ReplyGraph& history,
                               const CommunityAssignment& communities, const ReplyGraph& current,
                               const ReplyGraph& merged, const Adjacency& merged_adj);

}  // namespace darkwatch
