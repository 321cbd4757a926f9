// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/features.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "darkwatch/communities.hpp"
#include "darkwatch/error.hpp"

namespace darkwatch {

namespace {

constexpr std::pair<FeatureId, std::string_view> kFeatureNames[] = {
    {FeatureId::Conductance, "conductance"},
    {FeatureId::ShortestPath, "shortest_path"},
    {FeatureId::ExpertReplies, "expert_replies"},
    {FeatureId::CommonCommunities, "common_communities"},
    {FeatureId::NThreads, "n_threads"},
    {FeatureId::NUsers, "n_users"},
    {FeatureId::NExpertThreads, "n_expert_threads"},
    {FeatureId::NCveMentions, "n_cve_mentions"},
};

constexpr Coverage kCoverages[] = {Coverage::Computed, Coverage::EmptyGraph, Coverage::NoExperts,
                                   Coverage::NoBoundary};

// Day-aligned runs of each thread's posts: runs[i] holds the thread
// segments posted on span.at(i).
std::vector<std::vector<std::span<const Post>>> day_segments(const Forum& forum, DayRange span) {
  std::vector<std::vector<std::span<const Post>>> runs(span.size());
  for (const auto& thread : forum.threads) {
    const auto& posts = thread.posts;
    std::size_t i = 0;
    while (i < posts.size()) {
      const Day d = day_of(posts[i].timestamp);
      std::size_t j = i + 1;
      while (j < posts.size() && day_of(posts[j].timestamp) == d) ++j;
      if (span.contains(d)) runs[static_cast<std::size_t>(span.index_of(d))].emplace_back(posts.data() + i, j - i);
      i = j;
    }
  }
  return runs;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string_view to_string(FeatureId id) {
  for (const auto& [f, name] : kFeatureNames) {
    if (f == id) return name;
  }
  return "unknown";
}

std::optional<FeatureId> parse_feature_id(std::string_view text) {
  for (const auto& [f, name] : kFeatureNames) {
    if (name == text) return f;
  }
  return std::nullopt;
}

bool is_graph_feature(FeatureId id) {
  return id == FeatureId::Conductance || id == FeatureId::ShortestPath || id == FeatureId::ExpertReplies ||
         id == FeatureId::CommonCommunities;
}

MetadataCounts metadata_features(std::span<const Post* const> day_posts, const ExpertSet& experts) {
  std::set<std::string_view> threads, expert_threads, cves;
  std::set<UserId> users;
  for (const Post* p : day_posts) {
    threads.insert(p->thread_id);
    users.insert(p->user);
    if (experts.contains(p->user)) expert_threads.insert(p->thread_id);
    for (const auto& c : p->cve_mentions) cves.insert(c);
  }
  return {threads.size(), users.size(), expert_threads.size(), cves.size()};
}

std::vector<FeatureSeries> compute_feature_series(const Forum& forum, const CpeMap& cpe,
                                                  const WindowSchedule& schedule, const FeatureParams& params,
                                                  std::span<const FeatureId> features) {
  const DayRange span = schedule.study_span();
  std::vector<FeatureSeries> out;
  for (auto f : features) {
    out.push_back({f, forum.id, span, std::vector<double>(span.size(), 0.0),
                   std::vector<Coverage>(span.size(), Coverage::Computed)});
  }
  const bool want_graph = std::any_of(features.begin(), features.end(), is_graph_feature);
  const bool want_cc = std::find(features.begin(), features.end(), FeatureId::CommonCommunities) != features.end();

  const auto runs = day_segments(forum, span);
  for (const auto& pair : schedule.pairs) {
    const DayRange hist = pair.history.days;
    const ReplyGraph history = create_graph(forum, hist, params.construction);
    const auto hist_posts = posts_in(forum, hist);
    const auto ranking = rank_cpe_groups(hist_posts, cpe, hist, params.top_k);
    const auto experts = extract_experts(history, hist_posts, cpe, ranking, params.indeg_threshold);
    const auto expert_users = experts.users();
    CommunityAssignment communities;
    if (want_cc) communities = louvain_communities(history, params.seed);

    for (Day d = pair.subsequence.days.first; d <= pair.subsequence.days.last; d += std::chrono::days{1}) {
      if (!span.contains(d)) throw ConfigError("day " + format_date(d) + " outside the study span");
      const auto idx = static_cast<std::size_t>(span.index_of(d));
      const auto& segs = runs[idx];

      std::vector<const Post*> day_posts;
      for (const auto& seg : segs) {
        for (const auto& p : seg) day_posts.push_back(&p);
      }
      const auto meta = metadata_features(day_posts, experts);

      std::optional<ReplyGraph> current, merged;
      std::optional<Adjacency> adj;
      if (want_graph && !segs.empty() && !experts.empty()) {
        current = create_graph(std::span<const std::span<const Post>>(segs), DayRange{d, d}, params.construction);
        merged = merge(history, *current);
        adj.emplace(*merged);
      }

      for (auto& s : out) {
        if (!is_graph_feature(s.feature)) {
          double v = 0.0;
          switch (s.feature) {
            case FeatureId::NThreads:
              v = static_cast<double>(meta.threads);
              break;
            case FeatureId::NUsers:
              v = static_cast<double>(meta.users);
              break;
            case FeatureId::NExpertThreads:
              v = static_cast<double>(meta.expert_threads);
              break;
            default:
              v = static_cast<double>(meta.cve_mentions);
              break;
          }
          s.values[idx] = v;
          continue;
        }
        if (segs.empty()) {
          s.coverage[idx] = Coverage::EmptyGraph;
          continue;
        }
        if (experts.empty()) {
          s.coverage[idx] = Coverage::NoExperts;
          continue;
        }
        FeatureValue fv;
        const auto& day_users = current->vertices();
        switch (s.feature) {
          case FeatureId::Conductance:
            fv = params.conductance_day_targets
                     ? graph_conductance(*merged, *adj, expert_users, std::span<const UserId>(day_users), params.walk)
                     : graph_conductance(*merged, *adj, expert_users, std::nullopt, params.walk);
            break;
          case FeatureId::ShortestPath:
            fv = avg_shortest_path(*merged, *adj, expert_users, day_users);
            break;
          case FeatureId::ExpertReplies:
            fv = expert_replies(*merged, expert_users, params.replies);
            break;
          default:
            fv.value = static_cast<double>(
                common_communities(expert_users, history, communities, *current, *merged, *adj));
            break;
        }
        s.values[idx] = fv.value;
        s.coverage[idx] = fv.coverage;
      }
    }
  }
  return out;
}

const FeatureSeries* FeatureTable::find(FeatureId feature, std::string_view forum) const {
  for (const auto& s : series) {
    if (s.feature == feature && s.forum == forum) return &s;
  }
  return nullptr;
}

std::vector<const FeatureSeries*> FeatureTable::of(FeatureId feature) const {
  std::vector<const FeatureSeries*> out;
  for (const auto& s : series) {
    if (s.feature == feature) out.push_back(&s);
  }
  return out;
}

std::vector<FeatureId> FeatureTable::features() const {
  std::vector<FeatureId> out;
  for (const auto& s : series) {
    if (std::find(out.begin(), out.end(), s.feature) == out.end()) out.push_back(s.feature);
  }
  return out;
}

FeatureTable compute_feature_table(const Corpus& corpus, const CpeMap& cpe, const WindowSchedule& schedule,
                                   const FeatureParams& params, std::span<const FeatureId> features,
                                   unsigned threads) {
  const std::size_t n = corpus.forums.size();
  std::vector<std::vector<FeatureSeries>> per_forum(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        per_forum[i] = compute_feature_series(corpus.forums[i], cpe, schedule, params, features);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned pool = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < pool; ++t) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  FeatureTable table;
  table.span = schedule.study_span();
  for (std::size_t k = 0; k < features.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) table.series.push_back(std::move(per_forum[i][k]));
  }
  return table;
}

namespace {

void write_header(std::ostream& out, const FeatureTable& table) {
  out << "day";
  for (const auto& s : table.series) out << ',' << to_string(s.feature) << ':' << s.forum;
  out << '\n';
}

}  // namespace

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  write_header(out, table);
  for (std::size_t i = 0; i < table.span.size(); ++i) {
    out << format_date(table.span.at(i));
    for (const auto& s : table.series) out << ',' << format_value(s.values[i]);
    out << '\n';
  }
}

void write_flag_csv(std::ostream& out, const FeatureTable& table) {
  write_header(out, table);
  for (std::size_t i = 0; i < table.span.size(); ++i) {
    out << format_date(table.span.at(i));
    for (const auto& s : table.series) out << ',' << to_string(s.coverage[i]);
    out << '\n';
  }
}

FeatureTable read_feature_csv(std::istream& values, std::istream* flags) {
  std::string line;
  if (!std::getline(values, line)) throw DataError("feature csv: empty file");
  auto header = split_csv(line);
  if (header.empty() || header[0] != "day") throw DataError("feature csv: header must start with 'day'");

  FeatureTable table;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto colon = header[c].find(':');
    if (colon == std::string::npos) throw DataError("feature csv: bad column '" + header[c] + "'");
    auto id = parse_feature_id(std::string_view(header[c]).substr(0, colon));
    if (!id) throw DataError("feature csv: unknown feature in column '" + header[c] + "'");
    table.series.push_back({*id, header[c].substr(colon + 1), {}, {}, {}});
  }

  std::vector<Day> days;
  std::size_t line_no = 1;
  while (std::getline(values, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw DataError("feature csv line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields");
    }
    try {
      days.push_back(parse_date(fields[0]));
    } catch (const std::exception& e) {
      throw DataError("feature csv line " + std::to_string(line_no) + ": " + e.what());
    }
    if (days.size() > 1 && days.back() != days[days.size() - 2] + std::chrono::days{1}) {
      throw DataError("feature csv line " + std::to_string(line_no) + ": days must be consecutive");
    }
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      const auto& f = fields[c];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw DataError("feature csv line " + std::to_string(line_no) + ": bad number '" + f + "'");
      }
      table.series[c - 1].values.push_back(v);
    }
  }
  if (days.empty()) throw DataError("feature csv: no rows");
  table.span = {days.front(), days.back()};
  for (auto& s : table.series) {
    s.span = table.span;
    s.coverage.assign(days.size(), Coverage::Computed);
  }

  if (flags) {
    if (!std::getline(*flags, line) || split_csv(line) != header) throw DataError("flag csv: header mismatch");
    std::size_t row = 0;
    while (std::getline(*flags, line)) {
      if (line.empty()) continue;
      auto fields = split_csv(line);
      if (row >= days.size() || fields.size() != header.size() || fields[0] != format_date(days[row])) {
        throw DataError("flag csv: row " + std::to_string(row + 1) + " does not match the value csv");
      }
      for (std::size_t c = 1; c < fields.size(); ++c) {
        auto it = std::find_if(std::begin(kCoverages), std::end(kCoverages),
                               [&](Coverage cv) { return to_string(cv) == fields[c]; });
        if (it == std::end(kCoverages)) throw DataError("flag csv: unknown flag '" + fields[c] + "'");
        table.series[c - 1].coverage[row] = *it;
      }
      ++row;
    }
    if (row != days.size()) throw DataError("flag csv: row count differs from the value csv");
  }
  return table;
}

}  // namespace darkwatch
