// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "darkwatch/corpus.hpp"
#include "darkwatch/time.hpp"

namespace darkwatch {

/// Parameters of the planted-burst generator. Forums hold a fixed user
/// population; a few planted experts mention CVEs from a small block of CPE
/// groups and attract replies. In the `burst_lead` days before each planted
/// attack, a random subset of forums sees the experts post `burst_factor`
/// times their usual volume in fresh threads answered by many users.
struct SyntheticScenario {
  std::size_t n_forums = 10;
  std::size_t n_users_per_forum = 300;
  std::size_t n_days = 540;
  Day start = Day{std::chrono::year{2016} / 1 / 1};
  std::size_t n_attacks = 20;
  /// Explicit attack days; when empty, n_attacks days are placed at random.
  std::vector<Day> planted_attack_days;
  int burst_lead = 8;
  double burst_factor = 20.0;
  std::size_t min_burst_forums = 2;
  std::size_t max_burst_forums = 3;
  /// Expected background posts per forum-day.
  double noise_rate = 40.0;
  std::size_t experts_per_forum = 6;
  /// Share of background threads opened by an expert.
  double expert_open_share = 0.12;
  /// Expected daily incidents of the event types that carry no signal.
  double unrelated_attack_rate = 0.05;
  /// Months kept clear of planted attacks at the start (history plus one).
  int warmup_months = 4;
  EventType event_type = EventType::MaliciousEmail;
  std::uint64_t seed = 7;

  /// Throws ConfigError naming the first inconsistent field.
  void validate() const;
};

struct PlantedBurst {
  Day attack;
  DayRange burst;
  std::vector<std::string> forums;
  std::size_t incidents = 0;
};

/// Generator bookkeeping used by tests as ground truth.
struct SyntheticPlan {
  std::vector<PlantedBurst> bursts;
  /// forum id -> planted expert names
  std::vector<std::pair<std::string, std::vector<std::string>>> experts;
  std::vector<std::string> top_groups;
  std::size_t posts = 0;
  std::size_t threads = 0;
  std::size_t users = 0;
  std::size_t cve_mentions = 0;
  /// Posts authored by planted experts, split by whether the day lies in a
  /// burst window of that forum.
  std::size_t expert_posts_burst = 0;
  std::size_t expert_posts_background = 0;
  std::size_t burst_forum_days = 0;
  std::size_t background_forum_days = 0;
};

struct SyntheticCorpus {
  Corpus corpus;
  AttackLog attacks;
  CpeMap cpe;
  SyntheticPlan plan;
};

SyntheticCorpus synthesize_corpus(const SyntheticScenario& scenario);

/// Reads `key = value` lines (same keys as the struct fields; attack days as
/// a comma-separated date list). Unknown keys are a ConfigError.
SyntheticScenario read_scenario(std::istream& in);
void write_scenario(std::ostream& out, const SyntheticScenario& scenario);
void write_plan(std::ostream& out, const SyntheticPlan& plan);

/// Corpus of alternating two-party threads with posts five minutes apart.
/// A tight construction window links each post to its predecessor only, so
/// in-degrees follow the Zipf law used to size the threads; wide windows
/// link across many posts and flatten the distribution.
Corpus synthesize_calibration_corpus(std::size_t n_threads, double exponent, std::uint64_t seed);

}  // namespace darkwatch
