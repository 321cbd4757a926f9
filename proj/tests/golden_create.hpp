// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

// Hand-traced reply inference cases. Each expected edge set was worked out
// by hand from the candidate rules, post by post.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "darkwatch/reply_graph.hpp"

namespace darkwatch::testing {

struct CreatePost {
  const char* user;
  std::int64_t minute;
  std::int64_t post_id;
};

struct CreateCase {
  const char* name;
  std::size_t spatial;
  std::int64_t temporal_minutes;
  CreateVariant variant;
  std::vector<CreatePost> posts;  // input order; sorted by (time, post id) before use
  std::set<std::pair<std::string, std::string>> expected;  // replier -> replied_to
};

inline std::vector<CreateCase> create_golden_cases() {
  using V = CreateVariant;
  return {
      // 40 min exceeds the window; mean gap 1 < final gap 38 links D to all three.
      {"four-post else branch", 10, 15, V::Verbatim,
       {{"A", 0, 1}, {"B", 1, 2}, {"C", 2, 3}, {"D", 40, 4}},
       {{"B", "A"}, {"C", "A"}, {"C", "B"}, {"D", "A"}, {"D", "B"}, {"D", "C"}}},
      {"two posts inside the window", 10, 15, V::Verbatim, {{"A", 0, 1}, {"B", 5, 2}}, {{"B", "A"}}},
      {"single post", 10, 15, V::Verbatim, {{"A", 0, 1}}, {}},
      // E@60: mean 18 >= 6 drops A; B is 10 min away (>= 5) and mean 2 < 6 links B, C, D.
      // C@52 and D@54 drop A and stop at B, which is inside the window.
      {"removal loop ends on the mean test", 10, 5, V::Verbatim,
       {{"A", 0, 1}, {"B", 50, 2}, {"C", 52, 3}, {"D", 54, 4}, {"E", 60, 5}},
       {{"B", "A"}, {"C", "B"}, {"D", "B"}, {"D", "C"}, {"E", "B"}, {"E", "C"}, {"E", "D"}}},
      // D@41 drops A then B and stops at C; E@45 drops A then B and stops at C.
      // C@40 takes the link-all exit (mean 10 < 30).
      {"removal loop ends inside the window", 10, 15, V::Verbatim,
       {{"A", 0, 1}, {"B", 10, 2}, {"C", 40, 3}, {"D", 41, 4}, {"E", 45, 5}},
       {{"B", "A"}, {"C", "A"}, {"C", "B"}, {"D", "C"}, {"E", "C"}, {"E", "D"}}},
      {"replies to oneself produce no edge", 10, 15, V::Verbatim,
       {{"A", 0, 1}, {"B", 1, 2}, {"A", 2, 3}, {"A", 3, 4}},
       {{"B", "A"}, {"A", "B"}}},
      {"spatial threshold caps the candidates", 2, 15, V::Verbatim,
       {{"A", 0, 1}, {"B", 1, 2}, {"C", 2, 3}, {"D", 3, 4}},
       {{"B", "A"}, {"C", "A"}, {"C", "B"}, {"D", "B"}, {"D", "C"}}},
      // equal timestamps order by post id, so A precedes B
      {"timestamp ties break on post id", 10, 15, V::Verbatim,
       {{"B", 0, 2}, {"A", 0, 1}, {"C", 20, 3}},
       {{"B", "A"}, {"C", "A"}, {"C", "B"}}},
      {"strict variant keeps only candidates inside the window", 10, 15, V::Strict,
       {{"A", 0, 1}, {"B", 1, 2}, {"C", 2, 3}, {"D", 40, 4}},
       {{"B", "A"}, {"C", "A"}, {"C", "B"}, {"D", "C"}}},
      // all inside the window: post i links to min(i-1, 3) predecessors
      {"burst inside the window with a spatial cap", 3, 15, V::Verbatim,
       {{"A", 0, 1}, {"B", 1, 2}, {"C", 2, 3}, {"D", 3, 4}, {"E", 4, 5}},
       {{"B", "A"}, {"C", "A"}, {"C", "B"}, {"D", "A"}, {"D", "B"}, {"D", "C"}, {"E", "B"}, {"E", "C"},
        {"E", "D"}}},
  };
}

/// Runs one case and returns the inferred edges by user name.
inline std::set<std::pair<std::string, std::string>> run_create_case(const CreateCase& c) {
  UserTable users;
  std::vector<Post> posts;
  const Timestamp t0{Day{std::chrono::year{2016} / 1 / 1}};
  for (const auto& p : c.posts) {
    Post post;
    post.forum_id = "f";
    post.thread_id = "h";
    post.post_id = p.post_id;
    post.user = users.intern("f", p.user);
    post.timestamp = t0 + std::chrono::minutes{p.minute};
    posts.push_back(std::move(post));
  }
  std::sort(posts.begin(), posts.end(), chronologically_before);
  ConstructionParams params;
  params.spatial_posts = c.spatial;
  params.temporal = std::chrono::minutes{c.temporal_minutes};
  params.variant = c.variant;
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& e : create_thread_edges(posts, params)) {
    out.emplace(users.name(e.replier), users.name(e.replied_to));
  }
  return out;
}

}  // namespace darkwatch::testing
