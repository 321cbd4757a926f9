// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

#include "darkwatch/error.hpp"

namespace darkwatch {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file '" + path.string() + "'");
  return in;
}

// Calls fn(line_number, line) for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    fn(number, std::string_view(line));
  }
}

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

UserId UserTable::intern(std::string_view forum_id, std::string_view name) {
  std::string key;
  key.reserve(forum_id.size() + name.size() + 1);
  key.append(forum_id).push_back('\x1f');
  key.append(name);
  auto [it, inserted] = index_.try_emplace(std::move(key), UserId{static_cast<std::uint32_t>(names_.size())});
  if (inserted) {
    names_.emplace_back(name);
    forums_.emplace_back(forum_id);
  }
  return it->second;
}

std::optional<UserId> UserTable::find(std::string_view forum_id, std::string_view name) const {
  std::string key;
  key.append(forum_id).push_back('\x1f');
  key.append(name);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Forum::post_count() const {
  std::size_t n = 0;
  for (const auto& t : threads) n += t.posts.size();
  return n;
}

std::optional<DayRange> Forum::span() const {
  std::optional<DayRange> r;
  for (const auto& t : threads) {
    for (const auto& p : t.posts) {
      Day d = day_of(p.timestamp);
      if (!r) {
        r = DayRange{d, d};
      } else {
        r->first = std::min(r->first, d);
        r->last = std::max(r->last, d);
      }
    }
  }
  return r;
}

const Forum* Corpus::find_forum(std::string_view id) const {
  auto it = std::lower_bound(forums.begin(), forums.end(), id,
                             [](const Forum& f, std::string_view key) { return f.id < key; });
  return (it != forums.end() && it->id == id) ? &*it : nullptr;
}

std::size_t Corpus::post_count() const {
  std::size_t n = 0;
  for (const auto& f : forums) n += f.post_count();
  return n;
}

std::optional<DayRange> Corpus::span() const {
  std::optional<DayRange> r;
  for (const auto& f : forums) {
    auto s = f.span();
    if (!s) continue;
    if (!r) {
      r = s;
    } else {
      r->first = std::min(r->first, s->first);
      r->last = std::max(r->last, s->last);
    }
  }
  return r;
}

std::vector<std::string> extract_cve_ids(std::string_view text) {
  static const std::regex pattern(R"(CVE-\d{4}-\d{4,})");
  std::vector<std::string> out;
  for (std::cregex_iterator it(text.data(), text.data() + text.size(), pattern), end; it != end; ++it) {
    out.push_back(it->str());
  }
  sort_unique(out);
  return out;
}

PostsLoad parse_posts(std::istream& in, const PostLoadOptions& options) {
  PostsLoad result;
  // forum -> thread -> posts
  std::map<std::string, std::map<std::string, std::vector<Post>>, std::less<>> grouped;
  std::set<std::tuple<std::string, std::string, std::int64_t>> seen;

  for_each_record(in, [&](std::size_t number, std::string_view line) {
    auto fields = split(line, '\t');
    if (fields.size() != 6 && fields.size() != 7) {
      result.diagnostics.push_back({number, "expected 6 tab-separated fields, got " + std::to_string(fields.size())});
      return;
    }
    Post post;
    post.forum_id = std::string(trim(fields[0]));
    post.thread_id = std::string(trim(fields[1]));
    auto user = trim(fields[3]);
    if (post.forum_id.empty() || post.thread_id.empty() || user.empty()) {
      result.diagnostics.push_back({number, "empty forum, thread or user id"});
      return;
    }
    auto pid = trim(fields[2]);
    auto [ptr, ec] = std::from_chars(pid.data(), pid.data() + pid.size(), post.post_id);
    if (ec != std::errc{} || ptr != pid.data() + pid.size()) {
      result.diagnostics.push_back({number, "post_id is not an integer: '" + std::string(pid) + "'"});
      return;
    }
    try {
      post.timestamp = parse_timestamp(trim(fields[4]));
    } catch (const DataError& e) {
      result.diagnostics.push_back({number, e.what()});
      return;
    }
    auto cves = trim(fields[5]);
    if (!cves.empty()) {
      for (auto c : split(cves, ',')) {
        c = trim(c);
        if (!c.empty()) post.cve_mentions.emplace_back(c);
      }
    }
    if (options.extract_cves_from_text && fields.size() == 7) {
      for (auto& c : extract_cve_ids(fields[6])) post.cve_mentions.push_back(std::move(c));
    }
    sort_unique(post.cve_mentions);
    if (!seen.emplace(post.forum_id, post.thread_id, post.post_id).second) {
      result.diagnostics.push_back({number, "duplicate post_id " + std::to_string(post.post_id) + " in thread '" +
                                                post.thread_id + "' of forum '" + post.forum_id + "'"});
      return;
    }
    post.user = result.corpus.users.intern(post.forum_id, user);
    auto& bucket = grouped[post.forum_id][post.thread_id];
    bucket.push_back(std::move(post));
  });

  for (auto& [forum_id, threads] : grouped) {
    Forum forum;
    forum.id = forum_id;
    for (auto& [thread_id, posts] : threads) {
      std::sort(posts.begin(), posts.end(), chronologically_before);
      forum.threads.push_back(Thread{thread_id, std::move(posts)});
    }
    result.corpus.forums.push_back(std::move(forum));
  }
  return result;
}

PostsLoad load_posts(const std::filesystem::path& path, const PostLoadOptions& options) {
  auto in = open_or_throw(path);
  return parse_posts(in, options);
}

void write_posts(std::ostream& out, const Corpus& corpus) {
  for (const auto& forum : corpus.forums) {
    for (const auto& thread : forum.threads) {
      for (const auto& p : thread.posts) {
        out << p.forum_id << '\t' << p.thread_id << '\t' << p.post_id << '\t' << corpus.users.name(p.user) << '\t'
            << format_timestamp(p.timestamp) << '\t';
        for (std::size_t i = 0; i < p.cve_mentions.size(); ++i) {
          if (i) out << ',';
          out << p.cve_mentions[i];
        }
        out << '\n';
      }
    }
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(EventType type) {
  switch (type) {
    case EventType::MaliciousEmail:
      return "malicious-email";
    case EventType::EndpointMalware:
      return "endpoint-malware";
    case EventType::MaliciousDestination:
      return "malicious-destination";
  }
  return "unknown";
}

std::optional<EventType> parse_event_type(std::string_view text) {
  for (auto t : kAllEventTypes) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::optional<DayRange> AttackLog::span() const {
  if (records.empty()) return std::nullopt;
  DayRange r{records.front().day, records.front().day};
  for (const auto& rec : records) {
    r.first = std::min(r.first, rec.day);
    r.last = std::max(r.last, rec.day);
  }
  return r;
}

std::size_t AttackLog::total(EventType type) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [type](const AttackRecord& r) { return r.type == type; }));
}

LabelSeries AttackLog::series(EventType type, DayRange range) const {
  LabelSeries s;
  s.span = range;
  s.labels.assign(range.size(), 0);
  s.counts.assign(range.size(), 0);
  for (const auto& rec : records) {
    if (rec.type != type || !range.contains(rec.day)) continue;
    auto i = range.index_of(rec.day);
    ++s.counts[i];
    s.labels[i] = 1;
  }
  return s;
}

LabelSeries AttackLog::series(EventType type) const {
  auto s = span();
  if (!s) throw DataError("attack log is empty");
  return series(type, *s);
}

AttacksLoad parse_attacks(std::istream& in) {
  AttacksLoad result;
  for_each_record(in, [&](std::size_t number, std::string_view line) {
    auto fields = split(line, '\t');
    if (fields.size() != 2) {
      result.diagnostics.push_back({number, "expected 2 tab-separated fields"});
      return;
    }
    auto type = parse_event_type(trim(fields[0]));
    if (!type) {
      result.diagnostics.push_back({number, "unknown event type '" + std::string(trim(fields[0])) + "'"});
      return;
    }
    try {
      result.log.records.push_back({*type, parse_date(trim(fields[1]))});
    } catch (const DataError& e) {
      result.diagnostics.push_back({number, e.what()});
    }
  });
  return result;
}

AttacksLoad load_attacks(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_attacks(in);
}

void write_attacks(std::ostream& out, const AttackLog& log) {
  for (const auto& r : log.records) out << to_string(r.type) << '\t' << format_date(r.day) << '\n';
}

// ---------------------------------------------------------------------------

bool CpeMap::add(const std::string& cve, const std::vector<std::string>& groups) {
  auto [it, inserted] = table_.try_emplace(cve);
  it->second.insert(it->second.end(), groups.begin(), groups.end());
  sort_unique(it->second);
  return !inserted;
}

const std::vector<std::string>* CpeMap::lookup(std::string_view cve) const {
  auto it = table_.find(cve);
  return it == table_.end() ? nullptr : &it->second;
}

CpeLoad parse_cpe_map(std::istream& in) {
  CpeLoad result;
  for_each_record(in, [&](std::size_t number, std::string_view line) {
    auto fields = split(line, '\t');
    if (fields.size() != 2) {
      result.diagnostics.push_back({number, "expected 2 tab-separated fields"});
      return;
    }
    std::string cve(trim(fields[0]));
    std::vector<std::string> groups;
    for (auto g : split(fields[1], ';')) {
      g = trim(g);
      if (!g.empty()) groups.emplace_back(g);
    }
    if (cve.empty() || groups.empty()) {
      result.diagnostics.push_back({number, "CVE row needs an id and at least one CPE group"});
      return;
    }
    if (result.map.add(cve, groups)) {
      result.diagnostics.push_back({number, "duplicate row for " + cve + "; CPE groups unioned"});
    }
  });
  return result;
}

CpeLoad load_cpe_map(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_cpe_map(in);
}

void write_cpe_map(std::ostream& out, const CpeMap& map) {
  for (const auto& [cve, groups] : map.entries()) {
    out << cve << '\t';
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (i) out << ';';
      out << groups[i];
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

Forum trim_forum(const Forum& forum, const DayRange& window) {
  Forum out;
  out.id = forum.id;
  for (const auto& thread : forum.threads) {
    Thread t{thread.id, {}};
    for (const auto& p : thread.posts) {
      if (window.contains(day_of(p.timestamp))) t.posts.push_back(p);
    }
    if (!t.posts.empty()) out.threads.push_back(std::move(t));
  }
  return out;
}

}  // namespace

Corpus filter_forums(const Corpus& corpus, const ForumFilter& filter) {
  Corpus out;
  out.users = corpus.users;
  for (const auto& forum : corpus.forums) {
    if (filter.filter_before_trim && forum.post_count() <= filter.min_posts) continue;
    Forum kept = filter.study_window ? trim_forum(forum, *filter.study_window) : forum;
    if (!filter.filter_before_trim && kept.post_count() <= filter.min_posts) continue;
    out.forums.push_back(std::move(kept));
  }
  return out;
}

CorpusSummary summarize(const Corpus& corpus, const CpeMap* cpe) {
  CorpusSummary s;
  s.forums = corpus.forums.size();
  std::set<std::uint32_t> users;
  std::set<std::string> cves;
  for (const auto& f : corpus.forums) {
    s.threads += f.threads.size();
    for (const auto& t : f.threads) {
      s.posts += t.posts.size();
      for (const auto& p : t.posts) {
        users.insert(p.user.value);
        s.cve_mentions += p.cve_mentions.size();
        cves.insert(p.cve_mentions.begin(), p.cve_mentions.end());
      }
    }
  }
  s.users = users.size();
  s.distinct_cves = cves.size();
  if (cpe) {
    s.unmapped_cves = static_cast<std::size_t>(
        std::count_if(cves.begin(), cves.end(), [cpe](const std::string& c) { return !cpe->is_mapped(c); }));
  }
  s.span = corpus.span();
  return s;
}

}  // namespace darkwatch
