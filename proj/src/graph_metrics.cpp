// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/graph_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "darkwatch/error.hpp"

namespace darkwatch {

namespace {

void build_csr(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::vector<std::size_t>& off,
               std::vector<std::size_t>& data) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  off.assign(n + 1, 0);
  for (const auto& p : pairs) ++off[p.first + 1];
  for (std::size_t i = 0; i < n; ++i) off[i + 1] += off[i];
  data.resize(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) data[i] = pairs[i].second;
}

// Local indices of the users present in the graph, sorted and unique.
std::vector<std::size_t> local_indices(const ReplyGraph& graph, std::span<const UserId> users) {
  std::vector<std::size_t> out;
  for (auto u : users) {
    if (auto i = graph.index_of(u)) out.push_back(*i);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Adjacency::Adjacency(const ReplyGraph& graph) : n_(graph.vertex_count()) {
  std::vector<std::pair<std::size_t, std::size_t>> out_pairs, in_pairs, und_pairs;
  out_pairs.reserve(graph.edge_count());
  in_pairs.reserve(graph.edge_count());
  und_pairs.reserve(2 * graph.edge_count());
  // Edges are sorted by (replier, replied_to) and vertices are sorted, so a
  // running cursor resolves repliers without a search per edge.
  const auto& verts = graph.vertices();
  std::size_t cursor = 0;
  for (const auto& e : graph.edges()) {
    while (verts[cursor] < e.replier) ++cursor;
    std::size_t a = cursor;
    std::size_t b = *graph.index_of(e.replied_to);
    out_pairs.emplace_back(a, b);
    in_pairs.emplace_back(b, a);
    if (a != b) {
      und_pairs.emplace_back(a, b);
      und_pairs.emplace_back(b, a);
    }
  }
  build_csr(n_, out_pairs, out_off_, out_);
  build_csr(n_, in_pairs, in_off_, in_);
  build_csr(n_, und_pairs, und_off_, und_);
}

std::string_view to_string(Coverage c) {
  switch (c) {
    case Coverage::Computed:
      return "computed";
    case Coverage::EmptyGraph:
      return "empty-graph";
    case Coverage::NoExperts:
      return "no-experts";
    case Coverage::NoBoundary:
      return "no-boundary";
  }
  return "unknown";
}

double StationaryDistribution::at(UserId u) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), u);
  if (it == nodes.end() || *it != u) return 0.0;
  return probability[static_cast<std::size_t>(it - nodes.begin())];
}

namespace {

std::vector<double> teleport_fixed_point(const Adjacency& adj) {
  const std::size_t n = adj.size();
  const double keep = 1.0 - kTeleportProbability;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (int iter = 0; iter < 100000; ++iter) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (adj.out(v).empty()) dangling += pi[v];
    }
    const double base = (kTeleportProbability + keep * dangling) / static_cast<double>(n);
    std::fill(next.begin(), next.end(), base);
    for (std::size_t v = 0; v < n; ++v) {
      auto out = adj.out(v);
      if (out.empty()) continue;
      const double share = keep * pi[v] / static_cast<double>(out.size());
      for (auto w : out) next[w] += share;
    }
    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - pi[v]);
    pi.swap(next);
    if (change < 1e-12) break;
  }
  double total = 0.0;
  for (double p : pi) total += p;
  for (double& p : pi) p /= total;
  return pi;
}

}  // namespace

StationaryDistribution stationary_distribution(const ReplyGraph& graph, WalkMode mode) {
  Adjacency adj(graph);
  if (mode == WalkMode::UndirectedDegree ? adj.undirected_edge_count() == 0 : graph.edge_count() == 0) {
    throw DegenerateError("degenerate graph: no edges");
  }
  StationaryDistribution dist;
  dist.nodes = graph.vertices();
  if (mode == WalkMode::UndirectedDegree) {
    const double two_m = 2.0 * static_cast<double>(adj.undirected_edge_count());
    dist.probability.resize(adj.size());
    for (std::size_t v = 0; v < adj.size(); ++v) {
      dist.probability[v] = static_cast<double>(adj.undirected(v).size()) / two_m;
    }
  } else {
    dist.probability = teleport_fixed_point(adj);
  }
  return dist;
}

std::vector<double> transition_matrix(const ReplyGraph& graph, WalkMode mode) {
  Adjacency adj(graph);
  const std::size_t n = adj.size();
  std::vector<double> p(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (mode == WalkMode::UndirectedDegree) {
      auto nb = adj.undirected(x);
      for (auto y : nb) p[x * n + y] = 1.0 / static_cast<double>(nb.size());
    } else {
      auto out = adj.out(x);
      if (out.empty()) {
        for (std::size_t y = 0; y < n; ++y) p[x * n + y] = 1.0 / static_cast<double>(n);
        continue;
      }
      for (std::size_t y = 0; y < n; ++y) p[x * n + y] = kTeleportProbability / static_cast<double>(n);
      for (auto y : out) p[x * n + y] += (1.0 - kTeleportProbability) / static_cast<double>(out.size());
    }
  }
  return p;
}

FeatureValue graph_conductance(const ReplyGraph& graph, std::span<const UserId> experts,
                               std::optional<std::span<const UserId>> targets, WalkMode mode) {
  return graph_conductance(graph, Adjacency(graph), experts, targets, mode);
}

FeatureValue graph_conductance(const ReplyGraph& graph, const Adjacency& adj, std::span<const UserId> experts,
                               std::optional<std::span<const UserId>> targets, WalkMode mode) {
  const auto members = local_indices(graph, experts);
  if (members.empty()) return {0.0, Coverage::NoExperts};
  if (graph.edge_count() == 0) return {0.0, Coverage::EmptyGraph};

  const std::size_t n = adj.size();
  std::vector<char> in_set(n, 0), is_target(n, 0);
  for (auto v : members) in_set[v] = 1;
  if (targets) {
    for (auto v : local_indices(graph, *targets)) is_target[v] = !in_set[v];
  } else {
    for (std::size_t v = 0; v < n; ++v) is_target[v] = !in_set[v];
  }
  const auto n_targets = static_cast<std::size_t>(std::count(is_target.begin(), is_target.end(), 1));
  if (n_targets == 0) return {0.0, Coverage::NoBoundary};

  double flow = 0.0, mass = 0.0;
  if (mode == WalkMode::UndirectedDegree) {
    if (adj.undirected_edge_count() == 0) return {0.0, Coverage::EmptyGraph};
    // π(x) P_xy = 1 / 2|E| for every undirected edge x–y, so the ratio is a
    // count of boundary edges over the summed expert degree.
    for (auto x : members) {
      auto nb = adj.undirected(x);
      mass += static_cast<double>(nb.size());
      for (auto y : nb) flow += is_target[y] ? 1.0 : 0.0;
    }
  } else {
    auto pi = teleport_fixed_point(adj);
    const double keep = 1.0 - kTeleportProbability;
    for (auto x : members) {
      mass += pi[x];
      auto out = adj.out(x);
      double row = 0.0;
      if (out.empty()) {
        row = static_cast<double>(n_targets) / static_cast<double>(n);
      } else {
        row = kTeleportProbability * static_cast<double>(n_targets) / static_cast<double>(n);
        for (auto y : out) row += is_target[y] ? keep / static_cast<double>(out.size()) : 0.0;
      }
      flow += pi[x] * row;
    }
  }
  if (mass <= 0.0) return {0.0, Coverage::NoBoundary};
  const double phi = flow / mass;
  if (phi > 1.0 + 1e-9) throw std::logic_error("conductance exceeded 1");
  return {std::clamp(phi, 0.0, 1.0), Coverage::Computed};
}

FeatureValue avg_shortest_path(const ReplyGraph& graph, std::span<const UserId> experts,
                               std::span<const UserId> targets) {
  return avg_shortest_path(graph, Adjacency(graph), experts, targets);
}

FeatureValue avg_shortest_path(const ReplyGraph& graph, const Adjacency& adj, std::span<const UserId> experts,
                               std::span<const UserId> targets) {
  const auto members = local_indices(graph, experts);
  if (members.empty()) return {0.0, Coverage::NoExperts};
  const std::size_t n = adj.size();
  std::vector<char> in_set(n, 0), is_target(n, 0);
  for (auto v : members) in_set[v] = 1;
  std::size_t n_targets = 0;
  for (auto v : local_indices(graph, targets)) {
    if (!in_set[v]) {
      is_target[v] = 1;
      ++n_targets;
    }
  }
  if (n_targets == 0) return {0.0, Coverage::NoBoundary, members.size()};

  std::vector<std::size_t> dist(n);
  std::deque<std::size_t> queue;
  double sum = 0.0;
  std::size_t reached = 0;
  constexpr auto kUnseen = static_cast<std::size_t>(-1);
  for (auto source : members) {
    std::fill(dist.begin(), dist.end(), kUnseen);
    queue.clear();
    dist[source] = 0;
    queue.push_back(source);
    std::size_t found = kUnseen;
    while (!queue.empty() && found == kUnseen) {
      auto v = queue.front();
      queue.pop_front();
      for (auto w : adj.out(v)) {
        if (dist[w] != kUnseen) continue;
        dist[w] = dist[v] + 1;
        if (is_target[w]) {
          found = dist[w];
          break;
        }
        queue.push_back(w);
      }
    }
    if (found != kUnseen) {
      sum += static_cast<double>(found);
      ++reached;
    }
  }
  const std::size_t excluded = members.size() - reached;
  if (reached == 0) return {0.0, Coverage::NoBoundary, excluded};
  return {sum / static_cast<double>(reached), Coverage::Computed, excluded};
}

FeatureValue expert_replies(const ReplyGraph& graph, std::span<const UserId> experts, RepliesAggregate aggregate) {
  std::vector<UserId> unique(experts.begin(), experts.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (unique.empty()) return {0.0, Coverage::NoExperts};
  double total = 0.0;
  for (auto e : unique) total += static_cast<double>(graph.out_degree(e));
  if (aggregate == RepliesAggregate::Total) return {total, Coverage::Computed};
  return {total / static_cast<double>(unique.size()), Coverage::Computed};
}

}  // namespace darkwatch
