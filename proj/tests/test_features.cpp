// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>
#include <sstream>
#include <vector>

#include "darkwatch/features.hpp"
#include "darkwatch/synthetic.hpp"
#include "support.hpp"

using namespace darkwatch;
using namespace darkwatch::testing;

namespace {

SyntheticScenario small_scenario() {
  SyntheticScenario s;
  s.n_forums = 2;
  s.n_users_per_forum = 60;
  s.n_days = 160;
  s.n_attacks = 2;
  s.min_burst_forums = 1;
  s.max_burst_forums = 2;
  s.noise_rate = 15.0;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_CASE("metadata counts over one forum-day") {
  Names n;
  std::vector<Post> posts;
  auto add = [&](const char* thread, const char* user, std::vector<std::string> cves) {
    Post p;
    p.forum_id = "f";
    p.thread_id = thread;
    p.post_id = static_cast<std::int64_t>(posts.size()) + 1;
    p.user = n(user);
    p.cve_mentions = std::move(cves);
    posts.push_back(std::move(p));
  };
  add("t1", "e", {"CVE-1"});
  add("t1", "a", {"CVE-1", "CVE-2"});
  add("t2", "a", {});
  add("t3", "b", {"CVE-3"});
  add("t3", "e", {});
  std::vector<const Post*> ptrs;
  for (const auto& p : posts) ptrs.push_back(&p);
  ExpertSet experts;
  UserAssessment ua;
  ua.user = n("e");
  experts.members.push_back(ua);
  const auto m = metadata_features(ptrs, experts);
  CHECK(m.threads == 3);
  CHECK(m.users == 3);
  CHECK(m.expert_threads == 2);
  CHECK(m.cve_mentions == 3);
}

TEST_CASE("feature ids print and parse") {
  for (auto f : kAllFeatures) CHECK(parse_feature_id(to_string(f)) == f);
  CHECK_FALSE(parse_feature_id("bogus"));
  CHECK(is_graph_feature(FeatureId::Conductance));
  CHECK_FALSE(is_graph_feature(FeatureId::NUsers));
}

TEST_CASE("series cover the study span and the table is thread-count independent") {
  const auto syn = synthesize_corpus(small_scenario());
  const auto schedule = build_window_schedule(*syn.corpus.span());
  FeatureParams params;
  params.indeg_threshold = 5;
  const std::vector<FeatureId> features(std::begin(kAllFeatures), std::end(kAllFeatures));
  const auto one = compute_feature_table(syn.corpus, syn.cpe, schedule, params, features, 1);
  const auto four = compute_feature_table(syn.corpus, syn.cpe, schedule, params, features, 4);
  CHECK(one.span == schedule.study_span());
  CHECK(one.series.size() == features.size() * syn.corpus.forums.size());
  for (const auto& s : one.series) {
    CHECK(s.values.size() == one.span.size());
    CHECK(s.coverage.size() == one.span.size());
  }
  std::ostringstream a, b;
  write_feature_csv(a, one);
  write_feature_csv(b, four);
  CHECK(a.str() == b.str());

  // n_users equals the distinct posters of each day, computed directly
  const auto* users = one.find(FeatureId::NUsers, syn.corpus.forums[0].id);
  REQUIRE(users);
  for (std::size_t i = 0; i < one.span.size(); i += 17) {
    const Day d = one.span.at(i);
    std::set<UserId> seen;
    for (const auto& t : syn.corpus.forums[0].threads) {
      for (const auto& p : t.posts) {
        if (day_of(p.timestamp) == d) seen.insert(p.user);
      }
    }
    CHECK(users->values[i] == static_cast<double>(seen.size()));
  }
}

TEST_CASE("feature CSV round-trips with flags") {
  const auto syn = synthesize_corpus(small_scenario());
  const auto schedule = build_window_schedule(*syn.corpus.span());
  FeatureParams params;
  const std::vector<FeatureId> features{FeatureId::Conductance, FeatureId::NThreads};
  const auto table = compute_feature_table(syn.corpus, syn.cpe, schedule, params, features);
  std::ostringstream values, flags;
  write_feature_csv(values, table);
  write_flag_csv(flags, table);
  std::istringstream vin(values.str()), fin(flags.str());
  const auto back = read_feature_csv(vin, &fin);
  CHECK(back.span == table.span);
  REQUIRE(back.series.size() == table.series.size());
  for (std::size_t i = 0; i < back.series.size(); ++i) {
    CHECK(back.series[i].values == table.series[i].values);
    CHECK(back.series[i].coverage == table.series[i].coverage);
    CHECK(back.series[i].forum == table.series[i].forum);
  }
}
