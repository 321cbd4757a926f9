// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "darkwatch/error.hpp"
#include "darkwatch/random.hpp"

namespace darkwatch {

namespace {

constexpr std::size_t kGroups = 12;
constexpr std::size_t kTopGroups = 5;
constexpr std::size_t kCvesPerGroup = 12;
constexpr double kRegularReplies = 2.5;
constexpr double kExpertThreadReplies = 5.0;
constexpr double kExpertReplyShareInExpertThread = 0.3;
constexpr double kExpertReplyShareElsewhere = 0.05;
constexpr double kExpertCveRate = 0.4;
constexpr double kRegularCveRate = 0.02;
constexpr double kMeanGapSeconds = 420.0;
constexpr std::int64_t kLastStartSecond = 22 * 3600;

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

std::string group_name(std::size_t g) {
  static constexpr const char* kPlatforms[] = {"windows", "linux", "android", "macos"};
  static constexpr const char* kApps[] = {"office", "browser", "server"};
  return std::string(kPlatforms[g % 4]) + ":" + kApps[g / 4];
}

std::string cve_name(std::size_t i) { return "CVE-2016-" + std::to_string(1000 + i); }

// CVE indices by primary group. Groups 0..kTopGroups-1 form the top block.
// A mention picks its group uniformly within a block, so every top group
// collects a similar count, then a CVE of that group by Zipf rank.
struct CveCatalog {
  std::vector<std::vector<std::size_t>> by_group;
  std::vector<double> rank_cum;
};

std::vector<double> zipf_cumulative(std::size_t n, double s) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(static_cast<double>(i + 1), -s);
  return cumulative(w);
}

CveCatalog build_catalog(CpeMap& cpe, Rng& rng) {
  CveCatalog cat;
  cat.by_group.resize(kGroups);
  const std::size_t n = kGroups * kCvesPerGroup;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = i % kGroups;
    std::vector<std::string> groups{group_name(g)};
    if (g >= kTopGroups && rng.bernoulli(0.15)) {
      groups.push_back(group_name(kTopGroups + rng.below(kGroups - kTopGroups)));
    }
    cpe.add(cve_name(i), groups);
    cat.by_group[g].push_back(i);
  }
  for (auto& list : cat.by_group) rng.shuffle(list);
  cat.rank_cum = zipf_cumulative(kCvesPerGroup, 1.0);
  return cat;
}

struct ForumState {
  std::string id;
  std::vector<UserId> users;
  std::vector<std::size_t> experts;   // indices into users
  std::vector<std::size_t> regulars;  // indices into users
  std::vector<double> regular_cum;    // activity weights over regulars
  double weekly_sin = 0.0, weekly_cos = 0.0, slow = 0.0;
  Forum forum;
  std::size_t next_thread = 0;
};

class Generator {
 public:
  Generator(const SyntheticScenario& s, SyntheticCorpus& out) : s_(s), out_(out), rng_(s.seed) {}

  void run() {
    catalog_ = build_catalog(out_.cpe, rng_);
    for (std::size_t g = 0; g < kTopGroups; ++g) out_.plan.top_groups.push_back(group_name(g));
    std::sort(out_.plan.top_groups.begin(), out_.plan.top_groups.end());
    make_forums();
    place_attacks();
    simulate();
    finish();
  }

 private:
  void make_forums() {
    for (std::size_t f = 0; f < s_.n_forums; ++f) {
      ForumState st;
      st.id = numbered("forum", f + 1, 2);
      for (std::size_t u = 0; u < s_.n_users_per_forum; ++u) {
        st.users.push_back(out_.corpus.users.intern(st.id, numbered("user", u + 1, 4)));
      }
      std::vector<std::size_t> order(s_.n_users_per_forum);
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng_.shuffle(order);
      st.experts.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s_.experts_per_forum));
      st.regulars.assign(order.begin() + static_cast<std::ptrdiff_t>(s_.experts_per_forum), order.end());
      std::sort(st.experts.begin(), st.experts.end());
      st.regular_cum = zipf_cumulative(st.regulars.size(), 0.7);
      st.weekly_sin = rng_.uniform(-0.3, 0.3);
      st.weekly_cos = rng_.uniform(-0.3, 0.3);
      st.slow = rng_.uniform(-0.2, 0.2);
      st.forum.id = st.id;

      std::vector<std::string> names;
      for (auto e : st.experts) names.push_back(out_.corpus.users.name(st.users[e]));
      out_.plan.experts.emplace_back(st.id, std::move(names));
      forums_.push_back(std::move(st));
    }
  }

  void place_attacks() {
    std::vector<Day> days = s_.planted_attack_days;
    if (days.empty() && s_.n_attacks > 0) {
      const Day first = add_months(s_.start, s_.warmup_months);
      const Day last = s_.start + std::chrono::days(s_.n_days - 1);
      const auto length = static_cast<std::size_t>((last - first).count() + 1);
      const std::size_t seg = length / s_.n_attacks;
      const auto gap = static_cast<std::size_t>(2 * s_.burst_lead);
      if (seg <= gap) throw ConfigError("scenario: too many attacks for the span and burst_lead");
      for (std::size_t i = 0; i < s_.n_attacks; ++i) {
        days.push_back(first + std::chrono::days(i * seg + rng_.below(seg - gap + 1)));
      }
    }
    std::sort(days.begin(), days.end());
    for (auto d : days) {
      PlantedBurst b;
      b.attack = d;
      b.burst = {d - std::chrono::days(s_.burst_lead), d - std::chrono::days(1)};
      const std::size_t k = s_.min_burst_forums + rng_.below(s_.max_burst_forums - s_.min_burst_forums + 1);
      std::vector<std::size_t> pick(s_.n_forums);
      for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
      rng_.shuffle(pick);
      pick.resize(k);
      std::sort(pick.begin(), pick.end());
      for (auto f : pick) b.forums.push_back(forums_[f].id);
      b.incidents = 1 + rng_.below(4);
      for (std::size_t i = 0; i < b.incidents; ++i) out_.attacks.records.push_back({s_.event_type, d});
      out_.plan.bursts.push_back(std::move(b));
    }
  }

  bool in_burst(const ForumState& st, Day d) const {
    for (const auto& b : out_.plan.bursts) {
      if (b.burst.contains(d) && std::find(b.forums.begin(), b.forums.end(), st.id) != b.forums.end()) return true;
    }
    return false;
  }

  double modulation(const ForumState& st, std::size_t t) const {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(t) / 7.0;
    const double q = 2.0 * std::numbers::pi * static_cast<double>(t) / 91.0;
    return std::max(0.1, 1.0 + st.weekly_sin * std::sin(w) + st.weekly_cos * std::cos(w) + st.slow * std::sin(q));
  }

  // Expected expert-authored posts on a background forum-day.
  double expected_expert_posts(double threads) const {
    const double in_expert = s_.expert_open_share * (1.0 + kExpertThreadReplies * kExpertReplyShareInExpertThread);
    const double elsewhere = (1.0 - s_.expert_open_share) * kRegularReplies * kExpertReplyShareElsewhere;
    return threads * (in_expert + elsewhere);
  }

  std::size_t pick_regular(const ForumState& st) { return st.regulars[rng_.weighted(st.regular_cum)]; }

  std::string draw_cve(bool top) {
    const std::size_t g = top ? rng_.below(kTopGroups) : kTopGroups + rng_.below(kGroups - kTopGroups);
    return cve_name(catalog_.by_group[g][rng_.weighted(catalog_.rank_cum)]);
  }

  void add_cves(Post& p, bool expert) {
    if (expert) {
      if (!rng_.bernoulli(kExpertCveRate)) return;
      const std::size_t n = 1 + rng_.below(2);
      for (std::size_t i = 0; i < n; ++i) p.cve_mentions.push_back(draw_cve(true));
    } else {
      if (!rng_.bernoulli(kRegularCveRate)) return;
      p.cve_mentions.push_back(draw_cve(!rng_.bernoulli(0.85)));
    }
    std::sort(p.cve_mentions.begin(), p.cve_mentions.end());
    p.cve_mentions.erase(std::unique(p.cve_mentions.begin(), p.cve_mentions.end()), p.cve_mentions.end());
  }

  Thread& open_thread(ForumState& st) {
    st.forum.threads.push_back({numbered("t", ++st.next_thread, 6), {}});
    return st.forum.threads.back();
  }

  void post(ForumState& st, Thread& th, std::size_t user, Timestamp ts, bool expert, bool burst_day) {
    Post p;
    p.forum_id = st.id;
    p.thread_id = th.id;
    p.user = st.users[user];
    p.timestamp = ts;
    add_cves(p, expert);
    if (expert) ++(burst_day ? out_.plan.expert_posts_burst : out_.plan.expert_posts_background);
    th.posts.push_back(std::move(p));
  }

  void background_day(ForumState& st, Day d, std::size_t t, bool burst_day) {
    const double posts = s_.noise_rate * modulation(st, t);
    const double mean_len = 1.0 + s_.expert_open_share * kExpertThreadReplies +
                            (1.0 - s_.expert_open_share) * kRegularReplies;
    const auto n_threads = rng_.poisson(posts / mean_len);
    const Timestamp day0{d};
    for (std::uint64_t i = 0; i < n_threads; ++i) {
      const bool expert_open = rng_.bernoulli(s_.expert_open_share);
      const std::size_t opener = expert_open ? st.experts[rng_.below(st.experts.size())] : pick_regular(st);
      Thread& th = open_thread(st);
      auto ts = day0 + Seconds(static_cast<std::int64_t>(rng_.below(kLastStartSecond)));
      post(st, th, opener, ts, expert_open, burst_day);
      const auto replies = rng_.poisson(expert_open ? kExpertThreadReplies : kRegularReplies);
      std::size_t prev = opener;
      for (std::uint64_t r = 0; r < replies; ++r) {
        const double gap = -kMeanGapSeconds * std::log(1.0 - rng_.uniform());
        ts += Seconds(std::max<std::int64_t>(30, static_cast<std::int64_t>(gap)));
        if (day_of(ts) != d) break;
        const double expert_share = expert_open ? kExpertReplyShareInExpertThread : kExpertReplyShareElsewhere;
        std::size_t author;
        bool expert = false;
        if (rng_.bernoulli(expert_share)) {
          author = expert_open ? opener : st.experts[rng_.below(st.experts.size())];
          expert = true;
        } else {
          author = pick_regular(st);
          if (author == prev) author = pick_regular(st);
        }
        if (author == prev) continue;
        post(st, th, author, ts, expert, burst_day);
        prev = author;
      }
    }
  }

  // Fresh threads where an expert alternates with distinct users.
  void burst_day(ForumState& st, Day d, std::size_t t) {
    const double mean_len = 1.0 + s_.expert_open_share * kExpertThreadReplies +
                            (1.0 - s_.expert_open_share) * kRegularReplies;
    const double threads = s_.noise_rate * modulation(st, t) / mean_len;
    const double extra = (s_.burst_factor - 1.0) * expected_expert_posts(threads);
    const auto target = rng_.poisson(extra);
    const Timestamp day0{d};
    std::uint64_t added = 0;
    while (added < target) {
      const std::size_t expert = st.experts[rng_.below(st.experts.size())];
      const std::size_t pairs = 4 + rng_.below(5);
      Thread& th = open_thread(st);
      auto ts = day0 + Seconds(static_cast<std::int64_t>(rng_.below(kLastStartSecond)));
      post(st, th, expert, ts, true, true);
      ++added;
      std::vector<std::size_t> used;
      for (std::size_t i = 0; i < pairs && added < target; ++i) {
        std::size_t u;
        do {
          u = st.regulars[rng_.below(st.regulars.size())];
        } while (std::find(used.begin(), used.end(), u) != used.end());
        used.push_back(u);
        ts += Seconds(240 + static_cast<std::int64_t>(rng_.below(120)));
        if (day_of(ts) != d) break;
        post(st, th, u, ts, false, true);
        ts += Seconds(240 + static_cast<std::int64_t>(rng_.below(120)));
        if (day_of(ts) != d) break;
        post(st, th, expert, ts, true, true);
        ++added;
      }
    }
  }

  void simulate() {
    for (std::size_t t = 0; t < s_.n_days; ++t) {
      const Day d = s_.start + std::chrono::days(t);
      for (auto& st : forums_) {
        const bool burst = in_burst(st, d);
        ++(burst ? out_.plan.burst_forum_days : out_.plan.background_forum_days);
        background_day(st, d, t, burst);
        if (burst) burst_day(st, d, t);
      }
      for (EventType type : kAllEventTypes) {
        if (type == s_.event_type) continue;
        const auto n = rng_.poisson(s_.unrelated_attack_rate);
        for (std::uint64_t i = 0; i < n; ++i) out_.attacks.records.push_back({type, d});
      }
    }
  }

  void finish() {
    std::set<UserId> active;
    for (auto& st : forums_) {
      auto& threads = st.forum.threads;
      threads.erase(std::remove_if(threads.begin(), threads.end(), [](const Thread& th) { return th.posts.empty(); }),
                    threads.end());
      for (auto& th : threads) {
        std::stable_sort(th.posts.begin(), th.posts.end(),
                         [](const Post& a, const Post& b) { return a.timestamp < b.timestamp; });
        for (std::size_t i = 0; i < th.posts.size(); ++i) {
          th.posts[i].post_id = static_cast<std::int64_t>(i + 1);
          active.insert(th.posts[i].user);
          out_.plan.cve_mentions += th.posts[i].cve_mentions.size();
        }
        out_.plan.posts += th.posts.size();
      }
      out_.plan.threads += threads.size();
      out_.corpus.forums.push_back(std::move(st.forum));
    }
    out_.plan.users = active.size();
    std::stable_sort(out_.attacks.records.begin(), out_.attacks.records.end(),
                     [](const AttackRecord& a, const AttackRecord& b) {
                       if (a.day != b.day) return a.day < b.day;
                       return static_cast<int>(a.type) < static_cast<int>(b.type);
                     });
  }

  const SyntheticScenario& s_;
  SyntheticCorpus& out_;
  Rng rng_;
  CveCatalog catalog_;
  std::vector<ForumState> forums_;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof()) throw ConfigError("scenario: bad value for " + key + ": '" + value + "'");
  return out;
}

}  // namespace

void SyntheticScenario::validate() const {
  if (n_forums == 0) throw ConfigError("scenario: n_forums must be positive");
  if (experts_per_forum == 0) throw ConfigError("scenario: experts_per_forum must be positive");
  if (n_users_per_forum < experts_per_forum + 20) {
    throw ConfigError("scenario: n_users_per_forum must exceed experts_per_forum by at least 20");
  }
  if (n_days == 0) throw ConfigError("scenario: n_days must be positive");
  if (burst_lead <= 0) throw ConfigError("scenario: burst_lead must be positive");
  if (!(burst_factor >= 1.0)) throw ConfigError("scenario: burst_factor must be at least 1");
  if (min_burst_forums == 0 || min_burst_forums > max_burst_forums || max_burst_forums > n_forums) {
    throw ConfigError("scenario: need 1 <= min_burst_forums <= max_burst_forums <= n_forums");
  }
  if (!(noise_rate > 0.0)) throw ConfigError("scenario: noise_rate must be positive");
  if (!(expert_open_share >= 0.0 && expert_open_share <= 1.0)) {
    throw ConfigError("scenario: expert_open_share must lie in [0, 1]");
  }
  if (!(unrelated_attack_rate >= 0.0)) throw ConfigError("scenario: unrelated_attack_rate must be non-negative");
  if (warmup_months < 0) throw ConfigError("scenario: warmup_months must be non-negative");
  if (start != month_start(start)) throw ConfigError("scenario: start must be the first day of a month");
  const Day last = start + std::chrono::days(n_days - 1);
  for (auto d : planted_attack_days) {
    if (d - std::chrono::days(burst_lead) < start || d > last) {
      throw ConfigError("scenario: planted attack " + format_date(d) + " leaves no room for its burst");
    }
  }
}

SyntheticCorpus synthesize_corpus(const SyntheticScenario& scenario) {
  scenario.validate();
  SyntheticCorpus out;
  Generator(scenario, out).run();
  return out;
}

SyntheticScenario read_scenario(std::istream& in) {
  SyntheticScenario s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("scenario line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "n_forums") s.n_forums = parse_number<std::size_t>(key, value);
    else if (key == "n_users_per_forum") s.n_users_per_forum = parse_number<std::size_t>(key, value);
    else if (key == "n_days") s.n_days = parse_number<std::size_t>(key, value);
    else if (key == "start") s.start = parse_date(value);
    else if (key == "n_attacks") s.n_attacks = parse_number<std::size_t>(key, value);
    else if (key == "planted_attack_days") {
      s.planted_attack_days.clear();
      std::istringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) {
        if (!trim(item).empty()) s.planted_attack_days.push_back(parse_date(trim(item)));
      }
    } else if (key == "burst_lead") s.burst_lead = parse_number<int>(key, value);
    else if (key == "burst_factor") s.burst_factor = parse_number<double>(key, value);
    else if (key == "min_burst_forums") s.min_burst_forums = parse_number<std::size_t>(key, value);
    else if (key == "max_burst_forums") s.max_burst_forums = parse_number<std::size_t>(key, value);
    else if (key == "noise_rate") s.noise_rate = parse_number<double>(key, value);
    else if (key == "experts_per_forum") s.experts_per_forum = parse_number<std::size_t>(key, value);
    else if (key == "expert_open_share") s.expert_open_share = parse_number<double>(key, value);
    else if (key == "unrelated_attack_rate") s.unrelated_attack_rate = parse_number<double>(key, value);
    else if (key == "warmup_months") s.warmup_months = parse_number<int>(key, value);
    else if (key == "event_type") {
      auto t = parse_event_type(value);
      if (!t) throw ConfigError("scenario: unknown event_type '" + value + "'");
      s.event_type = *t;
    } else if (key == "seed") s.seed = parse_number<std::uint64_t>(key, value);
    else throw ConfigError("scenario line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  s.validate();
  return s;
}

void write_scenario(std::ostream& out, const SyntheticScenario& s) {
  out << "n_forums = " << s.n_forums << '\n'
      << "n_users_per_forum = " << s.n_users_per_forum << '\n'
      << "n_days = " << s.n_days << '\n'
      << "start = " << format_date(s.start) << '\n'
      << "n_attacks = " << s.n_attacks << '\n';
  out << "planted_attack_days = ";
  for (std::size_t i = 0; i < s.planted_attack_days.size(); ++i) {
    out << (i ? "," : "") << format_date(s.planted_attack_days[i]);
  }
  out << '\n'
      << "burst_lead = " << s.burst_lead << '\n'
      << "burst_factor = " << s.burst_factor << '\n'
      << "min_burst_forums = " << s.min_burst_forums << '\n'
      << "max_burst_forums = " << s.max_burst_forums << '\n'
      << "noise_rate = " << s.noise_rate << '\n'
      << "experts_per_forum = " << s.experts_per_forum << '\n'
      << "expert_open_share = " << s.expert_open_share << '\n'
      << "unrelated_attack_rate = " << s.unrelated_attack_rate << '\n'
      << "warmup_months = " << s.warmup_months << '\n'
      << "event_type = " << to_string(s.event_type) << '\n'
      << "seed = " << s.seed << '\n';
}

void write_plan(std::ostream& out, const SyntheticPlan& plan) {
  out << "# posts=" << plan.posts << " threads=" << plan.threads << " users=" << plan.users
      << " cve_mentions=" << plan.cve_mentions << '\n';
  out << "# expert_posts burst=" << plan.expert_posts_burst << " over " << plan.burst_forum_days
      << " forum-days, background=" << plan.expert_posts_background << " over " << plan.background_forum_days
      << " forum-days\n";
  out << "top_groups";
  for (const auto& g : plan.top_groups) out << '\t' << g;
  out << '\n';
  for (const auto& [forum, names] : plan.experts) {
    out << "experts\t" << forum;
    for (const auto& n : names) out << '\t' << n;
    out << '\n';
  }
  for (const auto& b : plan.bursts) {
    out << "attack\t" << format_date(b.attack) << '\t' << format_range(b.burst) << '\t' << b.incidents;
    for (const auto& f : b.forums) out << '\t' << f;
    out << '\n';
  }
}

Corpus synthesize_calibration_corpus(std::size_t n_threads, double exponent, std::uint64_t seed) {
  Rng rng(seed);
  Corpus corpus;
  Forum forum;
  forum.id = "calibration";
  constexpr std::size_t kMaxRepliers = 200;
  const auto sizes = zipf_cumulative(kMaxRepliers, exponent);
  std::size_t next_user = 0;
  const Timestamp origin{Day{std::chrono::year{2016} / 1 / 1}};
  for (std::size_t t = 0; t < n_threads; ++t) {
    const std::size_t k = 1 + rng.weighted(sizes);
    const UserId hub = corpus.users.intern(forum.id, numbered("hub", t + 1, 6));
    Thread th{numbered("c", t + 1, 6), {}};
    auto ts = origin + std::chrono::hours(24 * static_cast<std::int64_t>(t / 4)) +
              std::chrono::hours(6 * static_cast<std::int64_t>(t % 4));
    std::int64_t id = 0;
    auto add = [&](UserId u) {
      th.posts.push_back({forum.id, th.id, ++id, u, ts, {}});
      ts += std::chrono::minutes(5);
    };
    for (std::size_t j = 0; j < k; ++j) {
      add(hub);
      add(corpus.users.intern(forum.id, numbered("lurker", ++next_user, 7)));
    }
    forum.threads.push_back(std::move(th));
  }
  corpus.forums.push_back(std::move(forum));
  return corpus;
}

}  // namespace darkwatch
