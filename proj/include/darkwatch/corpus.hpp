// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "darkwatch/time.hpp"

namespace darkwatch {

/// Dense identifier of a (forum, user name) pair. User names are scoped to a
/// forum: the same name in two forums yields two distinct ids.
struct UserId {
  std::uint32_t value = 0;
  auto operator<=>(const UserId&) const = default;
};

class UserTable {
 public:
  UserId intern(std::string_view forum_id, std::string_view name);
  [[nodiscard]] std::optional<UserId> find(std::string_view forum_id, std::string_view name) const;
  [[nodiscard]] const std::string& name(UserId id) const { return names_.at(id.value); }
  [[nodiscard]] const std::string& forum(UserId id) const { return forums_.at(id.value); }
  [[nodiscard]] std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::vector<std::string> forums_;
  std::unordered_map<std::string, UserId> index_;
};

struct Post {
  std::string forum_id;
  std::string thread_id;
  std::int64_t post_id = 0;
  UserId user;
  Timestamp timestamp;
  std::vector<std::string> cve_mentions;  // sorted, unique
};

/// Chronological order within a thread: timestamp, then post_id.
inline bool chronologically_before(const Post& a, const Post& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.post_id < b.post_id;
}

struct Thread {
  std::string id;
  std::vector<Post> posts;  // chronological
};

struct Forum {
  std::string id;
  std::vector<Thread> threads;  // sorted by id

  [[nodiscard]] std::size_t post_count() const;
  [[nodiscard]] std::optional<DayRange> span() const;
};

struct Corpus {
  UserTable users;
  std::vector<Forum> forums;  // sorted by id

  [[nodiscard]] const Forum* find_forum(std::string_view id) const;
  [[nodiscard]] std::size_t post_count() const;
  [[nodiscard]] std::optional<DayRange> span() const;
};

/// A rejected or suspicious input line.
struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct PostLoadOptions {
  /// Scan an optional seventh free-text column for `CVE-YYYY-NNNN...` tokens.
  bool extract_cves_from_text = false;
};

struct PostsLoad {
  Corpus corpus;
  std::vector<Diagnostic> diagnostics;
};

PostsLoad load_posts(const std::filesystem::path& path, const PostLoadOptions& options = {});
PostsLoad parse_posts(std::istream& in, const PostLoadOptions& options = {});
/// Canonical serialization; parse_posts(write_posts(c)) reproduces c.
void write_posts(std::ostream& out, const Corpus& corpus);

std::vector<std::string> extract_cve_ids(std::string_view text);

// ---------------------------------------------------------------------------
// Attacks

enum class EventType { MaliciousEmail, EndpointMalware, MaliciousDestination };

inline constexpr EventType kAllEventTypes[] = {EventType::MaliciousEmail, EventType::EndpointMalware,
                                               EventType::MaliciousDestination};

std::string_view to_string(EventType type);
std::optional<EventType> parse_event_type(std::string_view text);

struct AttackRecord {
  EventType type;
  Day day;
};

/// Daily ground truth for one event type. label[i] = 1 iff count[i] >= 1.
struct LabelSeries {
  DayRange span;
  std::vector<int> labels;
  std::vector<int> counts;

  [[nodiscard]] int label_on(Day d) const { return span.contains(d) ? labels[span.index_of(d)] : 0; }
  [[nodiscard]] int count_on(Day d) const { return span.contains(d) ? counts[span.index_of(d)] : 0; }
};

struct AttackLog {
  std::vector<AttackRecord> records;

  /// Inclusive span from the earliest to the latest record of any type.
  [[nodiscard]] std::optional<DayRange> span() const;
  [[nodiscard]] std::size_t total(EventType type) const;
  [[nodiscard]] LabelSeries series(EventType type, DayRange span) const;
  /// Series over the record span. Throws DataError when there are no records.
  [[nodiscard]] LabelSeries series(EventType type) const;
};

struct AttacksLoad {
  AttackLog log;
  std::vector<Diagnostic> diagnostics;
};

AttacksLoad load_attacks(const std::filesystem::path& path);
AttacksLoad parse_attacks(std::istream& in);
void write_attacks(std::ostream& out, const AttackLog& log);

// ---------------------------------------------------------------------------
// CVE -> CPE groups

class CpeMap {
 public:
  /// Adds groups for `cve`, unioning with any existing entry. Returns true
  /// when the CVE was already present.
  bool add(const std::string& cve, const std::vector<std::string>& groups);
  /// Sorted group set, or nullptr when the CVE is unmapped.
  [[nodiscard]] const std::vector<std::string>* lookup(std::string_view cve) const;
  [[nodiscard]] bool is_mapped(std::string_view cve) const { return lookup(cve) != nullptr; }
  [[nodiscard]] std::size_t size() const { return table_.size(); }
  [[nodiscard]] const std::map<std::string, std::vector<std::string>, std::less<>>& entries() const {
    return table_;
  }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> table_;
};

struct CpeLoad {
  CpeMap map;
  std::vector<Diagnostic> diagnostics;
};

CpeLoad load_cpe_map(const std::filesystem::path& path);
CpeLoad parse_cpe_map(std::istream& in);
void write_cpe_map(std::ostream& out, const CpeMap& map);

// ---------------------------------------------------------------------------

struct ForumFilter {
  std::size_t min_posts = 5000;
  std::optional<DayRange> study_window;
  /// When false (default) the post-count filter runs after trimming to the
  /// study window.
  bool filter_before_trim = false;
};

Corpus filter_forums(const Corpus& corpus, const ForumFilter& filter);

struct CorpusSummary {
  std::size_t forums = 0;
  std::size_t threads = 0;
  std::size_t posts = 0;
  std::size_t users = 0;
  std::size_t cve_mentions = 0;
  std::size_t distinct_cves = 0;
  std::size_t unmapped_cves = 0;
  std::optional<DayRange> span;
};

CorpusSummary summarize(const Corpus& corpus, const CpeMap* cpe = nullptr);

}  // namespace darkwatch
