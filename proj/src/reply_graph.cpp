// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/reply_graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "darkwatch/error.hpp"

namespace darkwatch {

namespace {

bool pair_less(const ReplyEdge& a, const ReplyEdge& b) {
  if (a.replier != b.replier) return a.replier < b.replier;
  if (a.replied_to != b.replied_to) return a.replied_to < b.replied_to;
  return a.reply_time < b.reply_time;
}

bool same_pair(const ReplyEdge& a, const ReplyEdge& b) {
  return a.replier == b.replier && a.replied_to == b.replied_to;
}

void normalize_edges(std::vector<ReplyEdge>& edges) {
  std::sort(edges.begin(), edges.end(), pair_less);
  edges.erase(std::unique(edges.begin(), edges.end(), same_pair), edges.end());
}

}  // namespace

void ConstructionParams::validate() const {
  if (spatial_posts < 1) throw ConfigError("thresh_spat must be >= 1");
  if (temporal <= Seconds{0}) throw ConfigError("thresh_temp must be positive");
}

ReplyGraph::ReplyGraph(std::vector<UserId> vertices, std::vector<ReplyEdge> edges, DayRange span)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), span_(span) {
  normalize_edges(edges_);
  for (const auto& e : edges_) {
    vertices_.push_back(e.replier);
    vertices_.push_back(e.replied_to);
  }
  std::sort(vertices_.begin(), vertices_.end());
  vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
  in_degrees_.assign(vertices_.size(), 0);
  for (const auto& e : edges_) ++in_degrees_[*index_of(e.replied_to)];
}

std::optional<std::size_t> ReplyGraph::index_of(UserId u) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), u);
  if (it == vertices_.end() || *it != u) return std::nullopt;
  return static_cast<std::size_t>(it - vertices_.begin());
}

bool ReplyGraph::has_edge(UserId from, UserId to) const {
  ReplyEdge probe{from, to, Timestamp::min()};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), probe, pair_less);
  return it != edges_.end() && it->replier == from && it->replied_to == to;
}

std::size_t ReplyGraph::in_degree(UserId u) const {
  auto i = index_of(u);
  return i ? in_degrees_[*i] : 0;
}

std::size_t ReplyGraph::out_degree(UserId u) const {
  auto lo = std::lower_bound(edges_.begin(), edges_.end(), u,
                             [](const ReplyEdge& e, UserId key) { return e.replier < key; });
  auto hi = std::upper_bound(lo, edges_.end(), u, [](UserId key, const ReplyEdge& e) { return key < e.replier; });
  return static_cast<std::size_t>(hi - lo);
}

std::vector<ReplyEdge> create_thread_edges(std::span<const Post> posts, const ConstructionParams& params) {
  params.validate();
  std::vector<ReplyEdge> edges;
  const auto temporal = params.temporal.count();

  auto link = [&](std::size_t i, std::size_t lo) {
    for (std::size_t k = lo; k < i; ++k) {
      if (params.suppress_self_replies && posts[k].user == posts[i].user) continue;
      edges.push_back({posts[i].user, posts[k].user, posts[i].timestamp});
    }
  };
  auto secs = [&](std::size_t i) { return posts[i].timestamp.time_since_epoch().count(); };

  for (std::size_t i = 1; i < posts.size(); ++i) {
    std::size_t lo = i > params.spatial_posts ? i - params.spatial_posts : 0;
    const auto t_i = secs(i);

    if (t_i - secs(lo) < temporal) {
      link(i, lo);
      continue;
    }

    if (params.variant == CreateVariant::Strict) {
      while (lo + 1 < i && t_i - secs(lo) >= temporal) ++lo;
      link(i, lo);
      continue;
    }

    // Δt_i is measured against the latest candidate, which removals from the
    // far end never touch.
    const double final_gap = static_cast<double>(t_i - secs(i - 1));
    while (true) {
      const std::size_t m = i - lo;
      // Mean of successive gaps telescopes to (last - first) / (m - 1); a
      // single candidate has no gaps and a mean of zero.
      const double mean_gap = m >= 2 ? static_cast<double>(secs(i - 1) - secs(lo)) / static_cast<double>(m - 1) : 0.0;
      if (mean_gap < final_gap) {
        link(i, lo);
        break;
      }
      ++lo;
      if (lo >= i) break;
      if (t_i - secs(lo) < temporal) {
        link(i, lo);
        break;
      }
    }
  }
  normalize_edges(edges);
  return edges;
}

ReplyGraph create_graph(std::span<const std::span<const Post>> segments, DayRange span,
                        const ConstructionParams& params) {
  std::vector<UserId> vertices;
  std::vector<ReplyEdge> edges;
  for (auto seg : segments) {
    for (const auto& p : seg) vertices.push_back(p.user);
    auto e = create_thread_edges(seg, params);
    edges.insert(edges.end(), e.begin(), e.end());
  }
  return ReplyGraph(std::move(vertices), std::move(edges), span);
}

ReplyGraph create_graph(const Forum& forum, DayRange window, const ConstructionParams& params) {
  std::vector<std::span<const Post>> segments;
  const Timestamp lo{window.first};
  const Timestamp hi{window.last + std::chrono::days{1}};
  for (const auto& thread : forum.threads) {
    auto first = std::lower_bound(thread.posts.begin(), thread.posts.end(), lo,
                                  [](const Post& p, Timestamp t) { return p.timestamp < t; });
    auto last = std::lower_bound(first, thread.posts.end(), hi,
                                 [](const Post& p, Timestamp t) { return p.timestamp < t; });
    if (first != last) segments.emplace_back(&*first, static_cast<std::size_t>(last - first));
  }
  return create_graph(segments, window, params);
}

ReplyGraph merge(const ReplyGraph& historical, const ReplyGraph& current) {
  std::vector<UserId> vertices;
  vertices.reserve(historical.vertex_count() + current.vertex_count());
  std::set_union(historical.vertices().begin(), historical.vertices().end(), current.vertices().begin(),
                 current.vertices().end(), std::back_inserter(vertices));
  std::vector<ReplyEdge> edges;
  edges.reserve(historical.edge_count() + current.edge_count());
  std::merge(historical.edges().begin(), historical.edges().end(), current.edges().begin(), current.edges().end(),
             std::back_inserter(edges), pair_less);
  DayRange span = historical.empty() ? current.span()
                  : current.empty()  ? historical.span()
                                     : DayRange{std::min(historical.span().first, current.span().first),
                                               std::max(historical.span().last, current.span().last)};
  return ReplyGraph(std::move(vertices), std::move(edges), span);
}

DayRange WindowSchedule::study_span() const {
  if (pairs.empty()) return DayRange{Day{}, Day{} - std::chrono::days{1}};
  return {pairs.front().subsequence.days.first, pairs.back().subsequence.days.last};
}

const WindowPair* WindowSchedule::find(Day d) const {
  for (const auto& p : pairs) {
    if (p.subsequence.days.contains(d)) return &p;
  }
  return nullptr;
}

WindowSchedule build_window_schedule(DayRange span, int subsequence_months, int history_months) {
  if (subsequence_months < 1 || history_months < 1) throw ConfigError("window spans must be at least one month");
  if (span.empty()) throw ConfigError("empty corpus span");
  WindowSchedule schedule;
  schedule.subsequence_months = subsequence_months;
  schedule.history_months = history_months;

  Day first_month = span.first == month_start(span.first) ? span.first : add_months(span.first, 1);
  Day tau_start = add_months(first_month, history_months);
  Day first_tau_end = add_months(tau_start, subsequence_months) - std::chrono::days{1};
  if (first_tau_end > span.last) {
    throw ConfigError("corpus span " + format_range(span) + " is too short: need " +
                      std::to_string(history_months + subsequence_months) + " whole months starting " +
                      format_date(first_month) + " (through " + format_date(first_tau_end) + ")");
  }
  while (tau_start <= span.last) {
    Day tau_end = std::min(add_months(tau_start, subsequence_months) - std::chrono::days{1}, span.last);
    Day hist_start = add_months(tau_start, -history_months);
    Day hist_end = tau_start - std::chrono::days{1};
    schedule.pairs.push_back({TimeWindow{{tau_start, tau_end}, WindowKind::Subsequence},
                              TimeWindow{{hist_start, hist_end}, WindowKind::History}});
    tau_start = add_months(tau_start, subsequence_months);
  }
  return schedule;
}

void write_graph(std::ostream& out, const ReplyGraph& graph, const UserTable& users, const std::string& forum_id) {
  out << "# forum=" << forum_id << " span=" << format_range(graph.span()) << '\n';
  for (const auto& e : graph.edges()) {
    out << users.name(e.replier) << '\t' << users.name(e.replied_to) << '\t' << format_timestamp(e.reply_time)
        << '\n';
  }
}

GraphSnapshot read_graph(std::istream& in, UserTable& users) {
  GraphSnapshot snap;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# forum=", 0) != 0) throw DataError("graph snapshot header missing");
  auto span_pos = line.find(" span=");
  if (span_pos == std::string::npos) throw DataError("graph snapshot header lacks span");
  snap.forum_id = line.substr(8, span_pos - 8);
  auto range = line.substr(span_pos + 6);
  auto dots = range.find("..");
  if (dots == std::string::npos) throw DataError("malformed span in graph header");
  DayRange span{parse_date(range.substr(0, dots)), parse_date(range.substr(dots + 2))};

  std::vector<ReplyEdge> edges;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, t;
    if (!std::getline(fields, a, '\t') || !std::getline(fields, b, '\t') || !std::getline(fields, t)) {
      throw DataError("malformed graph edge at line " + std::to_string(number));
    }
    edges.push_back({users.intern(snap.forum_id, a), users.intern(snap.forum_id, b), parse_timestamp(t)});
  }
  snap.graph = ReplyGraph({}, std::move(edges), span);
  return snap;
}

}  // namespace darkwatch
