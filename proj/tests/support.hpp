// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

// Small builders shared by the unit tests.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <unistd.h>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "darkwatch/corpus.hpp"
#include "darkwatch/reply_graph.hpp"
#include "darkwatch/time.hpp"

namespace darkwatch::testing {

inline Day day(const char* text) { return parse_date(text); }

inline Timestamp minutes_after(Day d, std::int64_t minutes) { return Timestamp{d} + std::chrono::minutes{minutes}; }

/// Users named by single strings, interned in one forum.
class Names {
 public:
  explicit Names(std::string forum = "f") : forum_(std::move(forum)) {}
  UserId operator()(const std::string& name) { return users.intern(forum_, name); }
  std::vector<UserId> many(std::initializer_list<const char*> names) {
    std::vector<UserId> out;
    for (auto n : names) out.push_back((*this)(n));
    return out;
  }
  UserTable users;

 private:
  std::string forum_;
};

/// (author, minute) pairs on one day become a chronologically ordered thread.
inline std::vector<Post> thread(Names& names, std::initializer_list<std::pair<const char*, std::int64_t>> posts,
                                Day d = Day{std::chrono::year{2016} / 1 / 1}, const char* thread_id = "h") {
  std::vector<Post> out;
  std::int64_t id = 0;
  for (const auto& [who, minute] : posts) {
    Post p;
    p.forum_id = "f";
    p.thread_id = thread_id;
    p.post_id = ++id;
    p.user = names(who);
    p.timestamp = minutes_after(d, minute);
    out.push_back(std::move(p));
  }
  return out;
}

/// Directed graph from (from, to) name pairs; `extra` adds isolated vertices.
inline ReplyGraph graph(Names& names, std::initializer_list<std::pair<const char*, const char*>> edges,
                        std::initializer_list<const char*> extra = {}) {
  std::vector<UserId> vertices;
  std::vector<ReplyEdge> list;
  const Timestamp t0{Day{std::chrono::year{2016} / 1 / 1}};
  for (const auto& [a, b] : edges) {
    vertices.push_back(names(a));
    vertices.push_back(names(b));
    list.push_back({names(a), names(b), t0});
  }
  for (auto e : extra) vertices.push_back(names(e));
  return ReplyGraph(std::move(vertices), std::move(list), DayRange{day_of(t0), day_of(t0)});
}

/// Fresh empty directory under the system temp path, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("darkwatch_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace darkwatch::testing
