// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "darkwatch/reply_graph.hpp"

namespace darkwatch {

/// CSR views of a ReplyGraph over local indices 0..n-1 (the order of
/// ReplyGraph::vertices()).
class Adjacency {
 public:
  explicit Adjacency(const ReplyGraph& graph);

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::span<const std::size_t> out(std::size_t v) const { return row(out_off_, out_, v); }
  [[nodiscard]] std::span<const std::size_t> in(std::size_t v) const { return row(in_off_, in_, v); }
  /// Neighbours in the undirected simple projection (reciprocal edges collapse).
  [[nodiscard]] std::span<const std::size_t> undirected(std::size_t v) const { return row(und_off_, und_, v); }
  [[nodiscard]] std::size_t undirected_edge_count() const { return und_.size() / 2; }

 private:
  static std::span<const std::size_t> row(const std::vector<std::size_t>& off, const std::vector<std::size_t>& data,
                                          std::size_t v) {
    return {data.data() + off[v], off[v + 1] - off[v]};
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> out_off_, out_, in_off_, in_, und_off_, und_;
};

/// Per-day outcome flag of a feature evaluation.
enum class Coverage {
  Computed,
  EmptyGraph,  // no edges (or no posts) to evaluate on
  NoExperts,   // empty expert set, or none present in the graph
  NoBoundary,  // nothing outside the expert set to reach or mix with
};

std::string_view to_string(Coverage c);

struct FeatureValue {
  double value = 0.0;
  Coverage coverage = Coverage::Computed;
  /// Experts left out of an average (shortest paths: no reachable target).
  std::size_t excluded = 0;
};

enum class WalkMode {
  /// π(v) = deg(v) / 2|E| on the undirected simple projection; P_xy = 1/deg(x).
  UndirectedDegree,
  /// Directed walk with uniform teleport; dangling nodes teleport.
  Teleport,
};

inline constexpr double kTeleportProbability = 0.15;

struct StationaryDistribution {
  std::vector<UserId> nodes;        // graph.vertices()
  std::vector<double> probability;  // aligned with nodes

  [[nodiscard]] double at(UserId u) const;
};

/// Throws DegenerateError on an edgeless graph.
StationaryDistribution stationary_distribution(const ReplyGraph& graph, WalkMode mode = WalkMode::UndirectedDegree);

/// Dense single-step transition matrix (row-major, n*n) of the walk in
/// `mode`. Intended for small graphs and checks.
std::vector<double> transition_matrix(const ReplyGraph& graph, WalkMode mode = WalkMode::UndirectedDegree);

/// Σ_{x∈S} Σ_{y∈Y} π(x) P_xy / π(S) for S = experts present in `graph` and
/// Y = targets \ S. `targets` defaults to every vertex; the feature pipeline
/// passes the users active on the current day.
FeatureValue graph_conductance(const ReplyGraph& graph, std::span<const UserId> experts,
                               std::optional<std::span<const UserId>> targets = std::nullopt,
                               WalkMode mode = WalkMode::UndirectedDegree);
/// Same, reusing an Adjacency already built for `graph`.
FeatureValue graph_conductance(const ReplyGraph& graph, const Adjacency& adj, std::span<const UserId> experts,
                               std::optional<std::span<const UserId>> targets = std::nullopt,
                               WalkMode mode = WalkMode::UndirectedDegree);

/// Mean over experts of the directed hop distance to the nearest user in
/// targets \ experts. Experts that reach no such user are excluded.
FeatureValue avg_shortest_path(const ReplyGraph& graph, std::span<const UserId> experts,
                               std::span<const UserId> targets);
FeatureValue avg_shortest_path(const ReplyGraph& graph, const Adjacency& adj, std::span<const UserId> experts,
                               std::span<const UserId> targets);

enum class RepliesAggregate { Mean, Total };

/// Out-degree of the experts in `graph`, averaged (default) or summed.
FeatureValue expert_replies(const ReplyGraph& graph, std::span<const UserId> experts,
                            RepliesAggregate aggregate = RepliesAggregate::Mean);

}  // namespace darkwatch
