// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "darkwatch/error.hpp"
#include "darkwatch/synthetic.hpp"
#include "support.hpp"

using namespace darkwatch;

namespace {

SyntheticScenario small_scenario() {
  SyntheticScenario s;
  s.n_forums = 3;
  s.n_users_per_forum = 80;
  s.n_days = 240;
  s.n_attacks = 4;
  s.noise_rate = 20.0;
  s.seed = 11;
  return s;
}

std::string posts_text(const SyntheticCorpus& c) {
  std::ostringstream out;
  write_posts(out, c.corpus);
  write_attacks(out, c.attacks);
  write_cpe_map(out, c.cpe);
  return out.str();
}

}  // namespace

TEST_CASE("a seed fixes the corpus") {
  const auto s = small_scenario();
  CHECK(posts_text(synthesize_corpus(s)) == posts_text(synthesize_corpus(s)));
  auto other = s;
  other.seed = 12;
  CHECK(posts_text(synthesize_corpus(s)) != posts_text(synthesize_corpus(other)));
}

TEST_CASE("plan counts agree with the corpus") {
  const auto c = synthesize_corpus(small_scenario());
  const auto summary = summarize(c.corpus, &c.cpe);
  CHECK(summary.forums == 3);
  CHECK(summary.posts == c.plan.posts);
  CHECK(summary.threads == c.plan.threads);
  CHECK(summary.users == c.plan.users);
  CHECK(summary.cve_mentions == c.plan.cve_mentions);
  CHECK(summary.unmapped_cves == 0);
  CHECK(c.plan.bursts.size() == 4);
  std::size_t incidents = 0;
  for (const auto& b : c.plan.bursts) {
    CHECK(b.burst.last + std::chrono::days(1) == b.attack);
    CHECK(b.burst.size() == 8);
    CHECK(b.forums.size() >= 2);
    CHECK(b.forums.size() <= 3);
    incidents += b.incidents;
  }
  CHECK(c.attacks.total(EventType::MaliciousEmail) == incidents);
}

TEST_CASE("zero planted attacks leave the target type empty") {
  auto s = small_scenario();
  s.n_attacks = 0;
  const auto c = synthesize_corpus(s);
  CHECK(c.plan.bursts.empty());
  CHECK(c.attacks.total(EventType::MaliciousEmail) == 0);
}

TEST_CASE("experts post far more inside bursts") {
  const auto c = synthesize_corpus(small_scenario());
  REQUIRE(c.plan.burst_forum_days > 0);
  const double burst = static_cast<double>(c.plan.expert_posts_burst) / static_cast<double>(c.plan.burst_forum_days);
  const double background =
      static_cast<double>(c.plan.expert_posts_background) / static_cast<double>(c.plan.background_forum_days);
  CHECK(burst > 5.0 * background);
}

TEST_CASE("explicit attack days are honoured") {
  auto s = small_scenario();
  s.planted_attack_days = {testing::day("2016-06-15"), testing::day("2016-07-20")};
  const auto c = synthesize_corpus(s);
  REQUIRE(c.plan.bursts.size() == 2);
  CHECK(c.plan.bursts[0].attack == testing::day("2016-06-15"));
  CHECK(c.plan.bursts[1].attack == testing::day("2016-07-20"));
}

TEST_CASE("scenario files round-trip and reject unknown keys") {
  auto s = small_scenario();
  s.planted_attack_days = {testing::day("2016-06-15")};
  std::ostringstream out;
  write_scenario(out, s);
  std::istringstream in(out.str());
  const auto back = read_scenario(in);
  std::ostringstream again;
  write_scenario(again, back);
  CHECK(out.str() == again.str());
  std::istringstream bad("n_forums = 3\nbogus = 1\n");
  CHECK_THROWS_AS(read_scenario(bad), ConfigError);
  auto invalid = small_scenario();
  invalid.min_burst_forums = 5;
  CHECK_THROWS_AS(invalid.validate(), ConfigError);
}
