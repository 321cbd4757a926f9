// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "darkwatch/communities.hpp"
#include "darkwatch/graph_metrics.hpp"
#include "darkwatch/random.hpp"

namespace darkwatch {

namespace {

// Weighted undirected graph; a self-loop of weight w stores w once in
// `self` and contributes 2w to the node degree.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> nbrs;
  std::vector<double> self;
  std::vector<double> degree;
  double total = 0.0;  // 2m

  std::size_t size() const { return nbrs.size(); }
};

LevelGraph from_adjacency(const Adjacency& adj) {
  LevelGraph g;
  const std::size_t n = adj.size();
  g.nbrs.resize(n);
  g.self.assign(n, 0.0);
  g.degree.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (auto w : adj.undirected(v)) g.nbrs[v].emplace_back(w, 1.0);
    g.degree[v] = static_cast<double>(adj.undirected(v).size());
    g.total += g.degree[v];
  }
  return g;
}

// One local-moving phase. Returns true when any node changed community.
bool local_moving(const LevelGraph& g, std::vector<std::size_t>& comm, Rng& rng) {
  const std::size_t n = g.size();
  if (g.total <= 0.0) return false;
  std::vector<double> tot(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) tot[comm[v]] += g.degree[v];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  bool moved_any = false;
  bool moved = true;
  int passes = 0;
  while (moved && passes++ < 1000) {
    moved = false;
    for (auto v : order) {
      const double k = g.degree[v];
      if (k == 0.0) continue;
      const std::size_t own = comm[v];
      touched.clear();
      link[own] = 0.0;
      touched.push_back(own);
      for (const auto& [w, wt] : g.nbrs[v]) {
        if (w == v) continue;
        auto c = comm[w];
        if (link[c] == 0.0 && std::find(touched.begin(), touched.end(), c) == touched.end()) touched.push_back(c);
        link[c] += wt;
      }
      tot[own] -= k;
      std::size_t best = own;
      double best_gain = link[own] - tot[own] * k / g.total;
      for (auto c : touched) {
        double gain = link[c] - tot[c] * k / g.total;
        if (gain > best_gain + 1e-12 || (std::abs(gain - best_gain) <= 1e-12 && c < best && c != own && best != own)) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += k;
      if (best != own) {
        comm[v] = best;
        moved = true;
        moved_any = true;
      }
      for (auto c : touched) link[c] = 0.0;
    }
  }
  return moved_any;
}

// Renumbers labels 0..k-1 in order of first appearance; returns k.
std::size_t compact(std::vector<std::size_t>& comm) {
  std::map<std::size_t, std::size_t> remap;
  for (auto& c : comm) {
    auto [it, inserted] = remap.try_emplace(c, remap.size());
    c = it->second;
  }
  return remap.size();
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<std::size_t>& comm, std::size_t k) {
  LevelGraph out;
  out.nbrs.resize(k);
  out.self.assign(k, 0.0);
  out.degree.assign(k, 0.0);
  out.total = g.total;
  std::vector<std::map<std::size_t, double>> acc(k);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto cv = comm[v];
    out.degree[cv] += g.degree[v];
    out.self[cv] += g.self[v];
    for (const auto& [w, wt] : g.nbrs[v]) {
      const auto cw = comm[w];
      if (cw == cv) {
        // each internal edge is seen from both endpoints
        out.self[cv] += wt / 2.0;
      } else {
        acc[cv][cw] += wt;
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (out.self[c] > 0.0) out.nbrs[c].emplace_back(c, out.self[c]);
    for (const auto& [d, wt] : acc[c]) out.nbrs[c].emplace_back(d, wt);
  }
  return out;
}

}  // namespace

std::optional<std::size_t> CommunityAssignment::of(UserId u) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), u);
  if (it == nodes.end() || *it != u) return std::nullopt;
  return community[static_cast<std::size_t>(it - nodes.begin())];
}

std::size_t CommunityAssignment::count() const {
  return community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
}

CommunityAssignment louvain_communities(const ReplyGraph& graph, std::uint64_t seed) {
  CommunityAssignment result;
  result.nodes = graph.vertices();
  const std::size_t n = graph.vertex_count();
  result.community.resize(n);
  std::iota(result.community.begin(), result.community.end(), 0);
  if (n == 0) return result;

  Adjacency adj(graph);
  LevelGraph level = from_adjacency(adj);
  Rng rng(seed);
  std::vector<std::size_t> node_to_level(n);
  std::iota(node_to_level.begin(), node_to_level.end(), 0);

  for (int depth = 0; depth < 64; ++depth) {
    std::vector<std::size_t> comm(level.size());
    std::iota(comm.begin(), comm.end(), 0);
    if (!local_moving(level, comm, rng)) break;
    const std::size_t k = compact(comm);
    for (auto& c : node_to_level) c = comm[c];
    if (k == level.size()) break;
    level = aggregate(level, comm, k);
  }
  result.community = node_to_level;
  compact(result.community);
  return result;
}

double modularity(const ReplyGraph& graph, const CommunityAssignment& assignment) {
  Adjacency adj(graph);
  const double two_m = 2.0 * static_cast<double>(adj.undirected_edge_count());
  if (two_m == 0.0) return 0.0;
  const std::size_t k = assignment.count();
  std::vector<double> internal(k, 0.0), tot(k, 0.0);
  for (std::size_t v = 0; v < adj.size(); ++v) {
    const auto cv = assignment.community[v];
    tot[cv] += static_cast<double>(adj.undirected(v).size());
    for (auto w : adj.undirected(v)) {
      if (assignment.community[w] == cv) internal[cv] += 1.0;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) q += internal[c] / two_m - (tot[c] / two_m) * (tot[c] / two_m);
  return q;
}

std::size_t common_communities(std::span<const UserId> experts, const ReplyGraph& history,
                               const CommunityAssignment& communities, const ReplyGraph& current,
                               const ReplyGraph& merged) {
  return common_communities(experts, history, communities, current, merged, Adjacency(merged));
}

std::size_t common_communities(std::span<const UserId> experts, const ReplyGraph& history,
                               const CommunityAssignment& communities, const ReplyGraph& current,
                               const ReplyGraph& merged, const Adjacency& adj) {
  std::set<std::size_t> expert_communities;
  std::vector<UserId> expert_list(experts.begin(), experts.end());
  std::sort(expert_list.begin(), expert_list.end());
  expert_list.erase(std::unique(expert_list.begin(), expert_list.end()), expert_list.end());
  for (auto e : expert_list) {
    if (auto c = communities.of(e)) expert_communities.insert(*c);
  }
  auto in_expert_community = [&](UserId u) {
    if (!history.contains(u)) return false;
    auto c = communities.of(u);
    return c && expert_communities.count(*c) > 0;
  };

  std::size_t count = 0;
  for (auto u : current.vertices()) {
    if (std::binary_search(expert_list.begin(), expert_list.end(), u)) continue;
    if (history.contains(u) && in_expert_community(u)) {
      ++count;
      continue;
    }
    const auto local = merged.index_of(u);
    bool counted = false;
    for (auto v : expert_list) {
      if (merged.has_edge(v, u)) {  // condition 1
        counted = true;
        break;
      }
      for (auto n : adj.in(*local)) {  // condition 2
        if (in_expert_community(merged.vertices()[n])) {
          counted = true;
          break;
        }
      }
      if (counted) break;
    }
    if (counted) ++count;
  }
  return count;
}

}  // namespace darkwatch
