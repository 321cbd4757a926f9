// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "darkwatch/corpus.hpp"
#include "darkwatch/error.hpp"
#include "support.hpp"

using namespace darkwatch;
using darkwatch::testing::day;

TEST_CASE("dates and timestamps parse and format") {
  CHECK(format_date(parse_date("2017-04-26")) == "2017-04-26");
  CHECK_THROWS_AS(parse_date("2017-02-30"), DataError);
  CHECK_THROWS_AS(parse_date("2017-4-26"), DataError);
  const auto t = parse_timestamp("2017-04-26T13:05:09Z");
  CHECK(format_timestamp(t) == "2017-04-26T13:05:09Z");
  CHECK(parse_timestamp("2017-04-26 13:05:09") == t);
  CHECK(parse_timestamp("2017-04-26T13:05:09+00:00") == t);
  CHECK_THROWS_AS(parse_timestamp("2017-04-26T25:00:00"), DataError);
}

TEST_CASE("calendar helpers") {
  CHECK(month_start(day("2016-02-17")) == day("2016-02-01"));
  CHECK(month_end(day("2016-02-17")) == day("2016-02-29"));
  CHECK(add_months(day("2016-11-30"), 3) == day("2017-02-01"));
  CHECK(months_touched(day("2016-01-31"), day("2016-02-01")) == 2);
  CHECK(months_touched(day("2016-01-01"), day("2017-05-31")) == 17);
  // 2016-01-03 is a Sunday closing ISO week 53 of 2015
  CHECK(iso_week(day("2016-01-03")) == IsoWeek{2015, 53});
  CHECK(iso_week(day("2016-01-04")) == IsoWeek{2016, 1});
  DayRange r{day("2016-01-01"), day("2016-01-10")};
  CHECK(r.size() == 10);
  CHECK(r.index_of(day("2016-01-05")) == 4);
  CHECK(r.at(9) == day("2016-01-10"));
}

TEST_CASE("three valid post lines load grouped by thread") {
  std::istringstream in(
      "f1\th1\t1\talice\t2016-01-01T10:00:00\tCVE-2016-0001\n"
      "f1\th1\t2\tbob\t2016-01-01T10:05:00\t\n"
      "f1\th2\t1\talice\t2016-01-02T10:00:00\tCVE-2016-0002,CVE-2016-0001\n");
  auto load = parse_posts(in);
  CHECK(load.diagnostics.empty());
  REQUIRE(load.corpus.forums.size() == 1);
  const auto& f = load.corpus.forums[0];
  REQUIRE(f.threads.size() == 2);
  CHECK(f.threads[0].posts.size() == 2);
  CHECK(f.threads[1].posts[0].cve_mentions == std::vector<std::string>{"CVE-2016-0001", "CVE-2016-0002"});
  CHECK(load.corpus.post_count() == 3);
}

TEST_CASE("malformed line yields one diagnostic naming its line") {
  std::istringstream in(
      "f1\th1\t1\talice\t2016-01-01T10:00:00\t\n"
      "f1\th1\tx\tbob\tnot-a-time\t\n");
  auto load = parse_posts(in);
  CHECK(load.corpus.post_count() == 1);
  REQUIRE(load.diagnostics.size() == 1);
  CHECK(load.diagnostics[0].line == 2);
}

TEST_CASE("equal timestamps order by post id; duplicate ids are rejected") {
  std::istringstream in(
      "f1\th1\t7\talice\t2016-01-01T10:00:00\t\n"
      "f1\th1\t3\tbob\t2016-01-01T10:00:00\t\n"
      "f1\th1\t3\tcarol\t2016-01-01T11:00:00\t\n");
  auto load = parse_posts(in);
  const auto& posts = load.corpus.forums[0].threads[0].posts;
  REQUIRE(posts.size() == 2);
  CHECK(posts[0].post_id == 3);
  CHECK(posts[1].post_id == 7);
  REQUIRE(load.diagnostics.size() == 1);
  CHECK(load.diagnostics[0].line == 3);
}

TEST_CASE("user names are scoped to their forum") {
  UserTable users;
  CHECK(users.intern("f1", "alice") != users.intern("f2", "alice"));
  CHECK(users.intern("f1", "alice") == users.intern("f1", "alice"));
}

TEST_CASE("serialising then parsing a corpus is lossless") {
  std::istringstream in(
      "f2\tz\t1\tu\t2016-03-01T00:00:00\t\n"
      "f1\th1\t2\tbob\t2016-01-01T10:05:00\tCVE-2016-0009\n"
      "f1\th1\t1\talice\t2016-01-01T10:00:00\t\n");
  auto first = parse_posts(in).corpus;
  std::ostringstream out;
  write_posts(out, first);
  std::istringstream again(out.str());
  auto second = parse_posts(again).corpus;
  std::ostringstream out2;
  write_posts(out2, second);
  CHECK(out.str() == out2.str());
  CHECK(second.post_count() == 3);
}

TEST_CASE("CVE ids are extracted from free text when asked") {
  CHECK(extract_cve_ids("see CVE-2017-0199 and cve-2017-11882, not CVE-17-1") ==
        std::vector<std::string>{"CVE-2017-0199"});
  std::istringstream in("f\th\t1\tu\t2016-01-01T00:00:00\t\tworks on CVE-2017-0199 now\n");
  PostLoadOptions opt;
  opt.extract_cves_from_text = true;
  auto load = parse_posts(in, opt);
  CHECK(load.corpus.forums[0].threads[0].posts[0].cve_mentions == std::vector<std::string>{"CVE-2017-0199"});
}

TEST_CASE("attack labels are 1 on any incident and keep raw counts") {
  std::istringstream in(
      "malicious-email\t2017-04-26\n"
      "malicious-email\t2017-04-26\n"
      "endpoint-malware\t2017-04-28\n"
      "phishing\t2017-04-27\n");
  auto load = parse_attacks(in);
  REQUIRE(load.diagnostics.size() == 1);
  CHECK(load.diagnostics[0].line == 4);
  const auto s = load.log.series(EventType::MaliciousEmail);
  CHECK(s.span == DayRange{day("2017-04-26"), day("2017-04-28")});
  CHECK(s.labels == std::vector<int>{1, 0, 0});
  CHECK(s.counts == std::vector<int>{2, 0, 0});
  CHECK(load.log.total(EventType::MaliciousEmail) == 2);
  CHECK(load.log.total(EventType::EndpointMalware) == 1);
}

TEST_CASE("loader totals match the file exactly") {
  // incident totals reported for the industrial feed: 135 / 119 / 26 over 17 months
  std::ostringstream text;
  const Day d0 = day("2016-01-01");
  for (int i = 0; i < 135; ++i) text << "malicious-email\t" << format_date(d0 + std::chrono::days(i * 3)) << '\n';
  for (int i = 0; i < 119; ++i) text << "endpoint-malware\t" << format_date(d0 + std::chrono::days(i * 4)) << '\n';
  for (int i = 0; i < 26; ++i) text << "malicious-destination\t" << format_date(d0 + std::chrono::days(i * 19)) << '\n';
  std::istringstream in(text.str());
  auto load = parse_attacks(in);
  CHECK(load.log.total(EventType::MaliciousEmail) == 135);
  CHECK(load.log.total(EventType::EndpointMalware) == 119);
  CHECK(load.log.total(EventType::MaliciousDestination) == 26);
  CHECK(load.log.records.size() == 280);
}

TEST_CASE("CPE map lookups, unmapped CVEs and duplicate unions") {
  std::istringstream in(
      "CVE-X\tmicrosoft windows_7\n"
      "CVE-Y\tA\n"
      "CVE-Y\tB\n");
  auto load = parse_cpe_map(in);
  REQUIRE(load.map.lookup("CVE-X"));
  CHECK(*load.map.lookup("CVE-X") == std::vector<std::string>{"microsoft windows_7"});
  CHECK(load.map.lookup("CVE-Z") == nullptr);
  CHECK_FALSE(load.map.is_mapped("CVE-Z"));
  CHECK(*load.map.lookup("CVE-Y") == std::vector<std::string>{"A", "B"});
  CHECK(load.diagnostics.size() == 1);
}

TEST_CASE("forum filter keeps forums strictly above the post count, after the trim by default") {
  std::ostringstream text;
  for (int i = 0; i < 6; ++i) text << "big\th" << i << "\t1\tu" << i << "\t2016-01-0" << (i % 3) + 1 << "T00:00:00\t\n";
  for (int i = 0; i < 3; ++i) text << "small\th" << i << "\t1\tu\t2016-01-01T00:00:00\t\n";
  std::istringstream in(text.str());
  auto corpus = parse_posts(in).corpus;
  ForumFilter f;
  f.min_posts = 3;
  CHECK(filter_forums(corpus, f).forums.size() == 1);
  f.study_window = DayRange{day("2016-01-01"), day("2016-01-01")};
  CHECK(filter_forums(corpus, f).forums.empty());  // big keeps 2 posts after the trim
  f.filter_before_trim = true;
  auto kept = filter_forums(corpus, f);
  REQUIRE(kept.forums.size() == 1);
  CHECK(kept.forums[0].post_count() == 2);
}

TEST_CASE("corpus summary counts") {
  std::istringstream in(
      "f1\th1\t1\talice\t2016-01-01T10:00:00\tCVE-A\n"
      "f1\th1\t2\tbob\t2016-01-01T10:05:00\tCVE-A,CVE-B\n"
      "f2\th1\t1\talice\t2016-01-05T10:00:00\tCVE-C\n");
  auto corpus = parse_posts(in).corpus;
  CpeMap cpe;
  cpe.add("CVE-A", {"g"});
  const auto s = summarize(corpus, &cpe);
  CHECK(s.forums == 2);
  CHECK(s.threads == 2);
  CHECK(s.posts == 3);
  CHECK(s.users == 3);
  CHECK(s.cve_mentions == 4);
  CHECK(s.distinct_cves == 3);
  CHECK(s.unmapped_cves == 2);
  CHECK(*s.span == DayRange{day("2016-01-01"), day("2016-01-05")});
}
