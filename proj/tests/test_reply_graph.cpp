// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "darkwatch/error.hpp"
#include "darkwatch/random.hpp"
#include "darkwatch/reply_graph.hpp"
#include "golden_create.hpp"
#include "support.hpp"

using namespace darkwatch;
using namespace darkwatch::testing;

TEST_CASE("reply inference golden traces") {
  for (const auto& c : create_golden_cases()) {
    CAPTURE(c.name);
    CHECK(run_create_case(c) == c.expected);
  }
}

TEST_CASE("self replies are kept when suppression is off") {
  Names n;
  auto posts = thread(n, {{"A", 0}, {"A", 1}});
  ConstructionParams p;
  p.suppress_self_replies = false;
  auto edges = create_thread_edges(posts, p);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].replier == edges[0].replied_to);
}

TEST_CASE("construction parameters are validated") {
  ConstructionParams p;
  p.spatial_posts = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.spatial_posts = 1;
  p.temporal = Seconds{0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

namespace {

Forum forum_of(Names& n, std::vector<std::vector<Post>> threads) {
  Forum f;
  f.id = "f";
  int i = 0;
  for (auto& t : threads) {
    const std::string id = "h" + std::to_string(i++);
    for (auto& p : t) p.thread_id = id;
    f.threads.push_back({id, std::move(t)});
  }
  (void)n;
  return f;
}

}  // namespace

TEST_CASE("edges repeated across threads collapse to one, earliest time kept") {
  Names n;
  const Day d = day("2016-01-01");
  auto t1 = thread(n, {{"A", 100}, {"B", 105}}, d);
  auto t2 = thread(n, {{"A", 0}, {"B", 5}}, d);
  auto f = forum_of(n, {t1, t2});
  auto g = create_graph(f, DayRange{d, d}, ConstructionParams{});
  REQUIRE(g.edge_count() == 1);
  CHECK(g.edges()[0].reply_time == minutes_after(d, 5));
  CHECK(g.in_degree(n("A")) == 1);
  CHECK(g.out_degree(n("B")) == 1);
}

TEST_CASE("singleton threads give vertices without edges") {
  Names n;
  const Day d = day("2016-01-01");
  auto f = forum_of(n, {thread(n, {{"A", 0}}, d), thread(n, {{"B", 0}}, d)});
  auto g = create_graph(f, DayRange{d, d}, ConstructionParams{});
  CHECK(g.vertex_count() == 2);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("the window restricts posts by day") {
  Names n;
  const Day d = day("2016-01-01");
  auto t = thread(n, {{"A", 0}, {"B", 5}, {"C", 24 * 60 + 1}}, d);
  auto f = forum_of(n, {t});
  auto g = create_graph(f, DayRange{d + std::chrono::days{1}, d + std::chrono::days{1}}, ConstructionParams{});
  CHECK(g.vertex_count() == 1);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("counted reply pairs across threads with duplicates") {
  // 12 generated reply pairs in 3 threads, 2 of them repeats: 10 edges
  Names n;
  const Day d = day("2016-01-01");
  const char* a[] = {"u1", "u2", "u3", "u4", "u5"};
  std::vector<std::vector<Post>> threads;
  std::set<std::pair<UserId, UserId>> oracle;
  std::size_t pairs = 0;
  // each thread alternates pairs of posts far apart so that only the
  // immediate predecessor is linked
  auto build = [&](std::vector<std::pair<int, int>> replies) {
    std::vector<Post> posts;
    std::int64_t minute = 0, id = 0;
    for (auto [from, to] : replies) {
      for (int who : {to, from}) {
        Post p;
        p.forum_id = "f";
        p.post_id = ++id;
        p.user = n(a[who]);
        p.timestamp = minutes_after(d, minute);
        minute += 1;
        posts.push_back(p);
      }
      minute += 120;
      oracle.emplace(n(a[from]), n(a[to]));
      ++pairs;
    }
    threads.push_back(posts);
  };
  build({{1, 0}, {2, 1}, {3, 2}, {4, 3}});
  build({{0, 1}, {0, 2}, {4, 0}, {1, 0}});
  build({{2, 4}, {3, 0}, {2, 1}, {1, 4}});
  ConstructionParams p;
  p.spatial_posts = 1;
  auto f = forum_of(n, threads);
  auto g = create_graph(f, DayRange{d, d}, p);
  std::set<std::pair<UserId, UserId>> got;
  for (const auto& e : g.edges()) got.emplace(e.replier, e.replied_to);
  // the spatial window of one also links each pair opener to the previous
  // pair's replier; count the oracle on the same rule
  std::set<std::pair<UserId, UserId>> expect;
  for (const auto& t : threads) {
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i].user != t[i - 1].user) expect.emplace(t[i].user, t[i - 1].user);
    }
  }
  CHECK(pairs == 12);
  CHECK(oracle.size() == 10);
  CHECK(got == expect);
  for (const auto& e : oracle) CHECK(got.count(e) == 1);
}

TEST_CASE("merge is a union with identity, commutativity and associativity") {
  Names n;
  auto g1 = graph(n, {{"a", "b"}, {"b", "c"}, {"x", "y"}});
  auto g2 = graph(n, {{"x", "y"}, {"d", "e"}}, {"z"});
  auto g3 = graph(n, {{"c", "a"}});
  CHECK(merge(g1, ReplyGraph{}) == g1);
  CHECK(merge(g1, g2) == merge(g2, g1));
  CHECK(merge(merge(g1, g2), g3) == merge(g1, merge(g2, g3)));
  CHECK(merge(g1, g1) == g1);
  const auto m = merge(g1, g2);
  CHECK(m.edge_count() == g1.edge_count() + g2.edge_count() - 1);

  Names n2;
  auto left = graph(n2, {{"a", "b"}, {"c", "d"}});
  auto right = graph(n2, {{"e", "f"}}, {"g"});
  CHECK(merge(left, right).vertex_count() == 7);
}

TEST_CASE("random merges match a set-union oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Names n;
    std::vector<ReplyEdge> e1, e2;
    std::set<std::pair<UserId, UserId>> oracle;
    const Timestamp t0{day("2016-01-01")};
    for (int i = 0; i < 15; ++i) {
      auto a = n("u" + std::to_string(rng.below(8)));
      auto b = n("u" + std::to_string(rng.below(8)));
      if (a == b) continue;
      (i % 2 ? e1 : e2).push_back({a, b, t0 + Seconds(i)});
      oracle.emplace(a, b);
    }
    DayRange s{day("2016-01-01"), day("2016-01-01")};
    auto m = merge(ReplyGraph({}, e1, s), ReplyGraph({}, e2, s));
    std::set<std::pair<UserId, UserId>> got;
    for (const auto& e : m.edges()) got.emplace(e.replier, e.replied_to);
    CHECK(got == oracle);
  }
}

TEST_CASE("graph construction ignores thread order") {
  Names n;
  const Day d = day("2016-01-01");
  auto t1 = thread(n, {{"A", 0}, {"B", 5}, {"C", 40}}, d);
  auto t2 = thread(n, {{"C", 0}, {"A", 3}}, d);
  auto t3 = thread(n, {{"B", 0}, {"D", 50}, {"A", 51}}, d);
  ConstructionParams p;
  auto g1 = create_graph(forum_of(n, {t1, t2, t3}), DayRange{d, d}, p);
  auto g2 = create_graph(forum_of(n, {t3, t1, t2}), DayRange{d, d}, p);
  CHECK(g1 == g2);
}

TEST_CASE("window schedules") {
  SUBCASE("four months give one pair") {
    auto s = build_window_schedule(DayRange{day("2016-10-01"), day("2017-01-31")});
    REQUIRE(s.pairs.size() == 1);
    CHECK(s.pairs[0].subsequence.days == DayRange{day("2017-01-01"), day("2017-01-31")});
    CHECK(s.pairs[0].history.days == DayRange{day("2016-10-01"), day("2016-12-31")});
  }
  SUBCASE("seventeen months give fourteen pairs") {
    auto s = build_window_schedule(DayRange{day("2016-01-01"), day("2017-05-31")});
    CHECK(s.pairs.size() == 14);
    for (std::size_t i = 0; i < s.pairs.size(); ++i) {
      CHECK(s.pairs[i].history.days.last + std::chrono::days{1} == s.pairs[i].subsequence.days.first);
      if (i) CHECK(s.pairs[i - 1].subsequence.days.last + std::chrono::days{1} == s.pairs[i].subsequence.days.first);
    }
    CHECK(s.study_span() == DayRange{day("2016-04-01"), day("2017-05-31")});
  }
  SUBCASE("short spans are rejected") {
    CHECK_THROWS_AS(build_window_schedule(DayRange{day("2016-01-01"), day("2016-03-31")}), ConfigError);
  }
  SUBCASE("a partial last month is truncated") {
    auto s = build_window_schedule(DayRange{day("2016-01-01"), day("2016-05-10")});
    REQUIRE(s.pairs.size() == 2);
    CHECK(s.pairs[1].subsequence.days.last == day("2016-05-10"));
  }
}

TEST_CASE("graph snapshots round-trip") {
  Names n;
  auto g = graph(n, {{"a", "b"}, {"b", "c"}});
  std::ostringstream out;
  write_graph(out, g, n.users, "f");
  std::istringstream in(out.str());
  UserTable users;
  auto snap = read_graph(in, users);
  CHECK(snap.forum_id == "f");
  CHECK(snap.graph.edge_count() == 2);
  CHECK(snap.graph.vertex_count() == 3);
}
