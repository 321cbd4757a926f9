// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "darkwatch/corpus.hpp"
#include "darkwatch/time.hpp"

namespace darkwatch {

/// replier -> replied_to, stamped with the time of the replying post.
struct ReplyEdge {
  UserId replier;
  UserId replied_to;
  Timestamp reply_time;

  bool operator==(const ReplyEdge&) const = default;
};

enum class CreateVariant {
  /// Candidate pruning exactly as the heuristic is stated: link all when the
  /// mean successive gap is below the final silence, otherwise drop the
  /// farthest candidate until that holds or the earliest survivor is within
  /// the temporal threshold.
  Verbatim,
  /// Plain intersection of both constraints: link only to candidates within
  /// the temporal threshold, falling back to the immediate predecessor.
  Strict,
};

struct ConstructionParams {
  std::size_t spatial_posts = 10;
  Seconds temporal = std::chrono::minutes{15};
  CreateVariant variant = CreateVariant::Verbatim;
  bool suppress_self_replies = true;

  void validate() const;
  bool operator==(const ConstructionParams&) const = default;
};

/// Directed, unweighted reply network. Edges are unique per
/// (replier, replied_to) pair; the earliest reply time survives.
class ReplyGraph {
 public:
  ReplyGraph() = default;
  ReplyGraph(std::vector<UserId> vertices, std::vector<ReplyEdge> edges, DayRange span);

  [[nodiscard]] const std::vector<UserId>& vertices() const { return vertices_; }
  /// Sorted by (replier, replied_to).
  [[nodiscard]] const std::vector<ReplyEdge>& edges() const { return edges_; }
  [[nodiscard]] const DayRange& span() const { return span_; }

  [[nodiscard]] std::size_t vertex_count() const { return vertices_.size(); }
  [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }
  [[nodiscard]] bool empty() const { return vertices_.empty(); }

  /// Position of `u` in vertices(), if present.
  [[nodiscard]] std::optional<std::size_t> index_of(UserId u) const;
  [[nodiscard]] bool contains(UserId u) const { return index_of(u).has_value(); }
  [[nodiscard]] bool has_edge(UserId from, UserId to) const;
  [[nodiscard]] std::size_t in_degree(UserId u) const;
  [[nodiscard]] std::size_t out_degree(UserId u) const;
  /// In-degrees aligned with vertices().
  [[nodiscard]] const std::vector<std::size_t>& in_degrees() const { return in_degrees_; }

  bool operator==(const ReplyGraph& other) const {
    return vertices_ == other.vertices_ && edges_ == other.edges_;
  }

 private:
  std::vector<UserId> vertices_;
  std::vector<ReplyEdge> edges_;
  std::vector<std::size_t> in_degrees_;
  DayRange span_{};
};

/// Infers reply edges for one chronologically ordered thread.
std::vector<ReplyEdge> create_thread_edges(std::span<const Post> thread_posts, const ConstructionParams& params);

/// Union of per-thread edges over the given thread segments. Each segment is
/// the chronologically ordered slice of one thread that falls inside `span`.
ReplyGraph create_graph(std::span<const std::span<const Post>> thread_segments, DayRange span,
                        const ConstructionParams& params);

/// Reply network of one forum restricted to posts whose day lies in `window`.
ReplyGraph create_graph(const Forum& forum, DayRange window, const ConstructionParams& params);

/// Vertex and edge union of a historical and a current network.
ReplyGraph merge(const ReplyGraph& historical, const ReplyGraph& current);

struct WindowPair {
  TimeWindow subsequence;
  TimeWindow history;
};

struct WindowSchedule {
  std::vector<WindowPair> pairs;
  int subsequence_months = 1;
  int history_months = 3;

  /// Union of all subsequence windows.
  [[nodiscard]] DayRange study_span() const;
  [[nodiscard]] const WindowPair* find(Day d) const;
};

/// Consecutive calendar-month subsequences, each paired with the
/// `history_months` immediately preceding it. The first history window
/// starts at the first whole month of `corpus_span`; the last subsequence is
/// truncated to the end of the span.
WindowSchedule build_window_schedule(DayRange corpus_span, int subsequence_months = 1, int history_months = 3);

/// Snapshot format: `# forum=<id> span=<first>..<last>` header, then
/// `replier<TAB>replied_to<TAB>reply_time` lines.
void write_graph(std::ostream& out, const ReplyGraph& graph, const UserTable& users, const std::string& forum_id);

struct GraphSnapshot {
  std::string forum_id;
  ReplyGraph graph;
};

GraphSnapshot read_graph(std::istream& in, UserTable& users);

}  // namespace darkwatch
