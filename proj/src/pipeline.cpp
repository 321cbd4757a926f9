// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#include "darkwatch/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "darkwatch/error.hpp"
#include "darkwatch/experts.hpp"

namespace darkwatch {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<FeatureId> to_features(const std::string& key, const std::string& v) {
  std::vector<FeatureId> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "all") {
      out.assign(std::begin(kAllFeatures), std::end(kAllFeatures));
      continue;
    }
    auto f = parse_feature_id(item);
    if (!f) throw ConfigError(key + ": unknown feature '" + item + "'");
    if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
  }
  if (out.empty()) throw ConfigError(key + ": empty feature list");
  return out;
}

std::string from_features(const std::vector<FeatureId>& fs_) {
  std::string out;
  for (std::size_t i = 0; i < fs_.size(); ++i) out += (i ? "," : "") + std::string(to_string(fs_[i]));
  return out;
}

std::optional<Day> to_day(const std::string& key, const std::string& v) {
  if (v.empty() || v == "none") return std::nullopt;
  try {
    return parse_date(v);
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::string from_day(const std::optional<Day>& d) { return d ? format_date(*d) : "none"; }

std::vector<ConfigKey> make_keys() {
  using C = PipelineConfig;
  std::vector<ConfigKey> k;
  auto path = [&](std::string name, std::string help, fs::path C::*member) {
    k.push_back({std::move(name), std::move(help), [member](const C& c) { return (c.*member).string(); },
                 [member](C& c, const std::string& v) { c.*member = v; }, true});
  };
  auto add = [&](std::string name, std::string help, std::function<std::string(const C&)> get,
                 std::function<void(C&, const std::string&)> set) {
    k.push_back({std::move(name), std::move(help), std::move(get), std::move(set), false});
  };
  path("posts", "posts file (forum, thread, post id, user, timestamp, CVEs)", &C::posts);
  path("attacks", "attack records file (event type, date)", &C::attacks);
  path("cpe", "CVE to CPE group map", &C::cpe);
  path("out", "output directory", &C::out);
  add("forum_min_posts", "keep forums with more posts than this",
      [](const C& c) { return std::to_string(c.forum_min_posts); },
      [](C& c, const std::string& v) { c.forum_min_posts = to_int<std::size_t>("forum_min_posts", v); });
  add("study_start", "first day of the study window (or none)", [](const C& c) { return from_day(c.study_start); },
      [](C& c, const std::string& v) { c.study_start = to_day("study_start", v); });
  add("study_end", "last day of the study window (or none)", [](const C& c) { return from_day(c.study_end); },
      [](C& c, const std::string& v) { c.study_end = to_day("study_end", v); });
  add("thresh_spat", "reply candidates: preceding posts considered",
      [](const C& c) { return std::to_string(c.feature.construction.spatial_posts); },
      [](C& c, const std::string& v) { c.feature.construction.spatial_posts = to_int<std::size_t>("thresh_spat", v); });
  add("thresh_temp_minutes", "reply candidates: temporal threshold in minutes",
      [](const C& c) {
        return shortest(static_cast<double>(c.feature.construction.temporal.count()) / 60.0);
      },
      [](C& c, const std::string& v) {
        c.feature.construction.temporal = Seconds(std::llround(to_double("thresh_temp_minutes", v) * 60.0));
      });
  add("create_variant", "verbatim or strict",
      [](const C& c) {
        return std::string(c.feature.construction.variant == CreateVariant::Verbatim ? "verbatim" : "strict");
      },
      [](C& c, const std::string& v) {
        if (v == "verbatim") c.feature.construction.variant = CreateVariant::Verbatim;
        else if (v == "strict") c.feature.construction.variant = CreateVariant::Strict;
        else throw ConfigError("create_variant: expected verbatim or strict");
      });
  add("suppress_self_replies", "drop edges from a user to themselves",
      [](const C& c) { return std::string(c.feature.construction.suppress_self_replies ? "true" : "false"); },
      [](C& c, const std::string& v) {
        c.feature.construction.suppress_self_replies = to_bool("suppress_self_replies", v);
      });
  add("subsequence_months", "length of each subsequence window",
      [](const C& c) { return std::to_string(c.subsequence_months); },
      [](C& c, const std::string& v) { c.subsequence_months = to_int<int>("subsequence_months", v); });
  add("history_months", "length of each history window", [](const C& c) { return std::to_string(c.history_months); },
      [](C& c, const std::string& v) { c.history_months = to_int<int>("history_months", v); });
  add("indeg_threshold", "minimum historical in-degree of an expert",
      [](const C& c) { return std::to_string(c.feature.indeg_threshold); },
      [](C& c, const std::string& v) { c.feature.indeg_threshold = to_int<std::size_t>("indeg_threshold", v); });
  add("top_k", "number of top CPE groups", [](const C& c) { return std::to_string(c.feature.top_k); },
      [](C& c, const std::string& v) { c.feature.top_k = to_int<std::size_t>("top_k", v); });
  add("walk_mode", "undirected or teleport",
      [](const C& c) { return std::string(c.feature.walk == WalkMode::UndirectedDegree ? "undirected" : "teleport"); },
      [](C& c, const std::string& v) {
        if (v == "undirected") c.feature.walk = WalkMode::UndirectedDegree;
        else if (v == "teleport") c.feature.walk = WalkMode::Teleport;
        else throw ConfigError("walk_mode: expected undirected or teleport");
      });
  add("conductance_targets", "day (users active on the day) or all (every non-expert)",
      [](const C& c) { return std::string(c.feature.conductance_day_targets ? "day" : "all"); },
      [](C& c, const std::string& v) {
        if (v == "day") c.feature.conductance_day_targets = true;
        else if (v == "all") c.feature.conductance_day_targets = false;
        else throw ConfigError("conductance_targets: expected day or all");
      });
  add("replies_aggregate", "mean or total expert out-degree",
      [](const C& c) { return std::string(c.feature.replies == RepliesAggregate::Mean ? "mean" : "total"); },
      [](C& c, const std::string& v) {
        if (v == "mean") c.feature.replies = RepliesAggregate::Mean;
        else if (v == "total") c.feature.replies = RepliesAggregate::Total;
        else throw ConfigError("replies_aggregate: expected mean or total");
      });
  add("features", "features to compute (comma list or all)", [](const C& c) { return from_features(c.features); },
      [](C& c, const std::string& v) { c.features = to_features("features", v); });
  add("eta", "lag window length in days", [](const C& c) { return std::to_string(c.eta); },
      [](C& c, const std::string& v) { c.eta = to_int<int>("eta", v); });
  add("delta", "lead gap in days", [](const C& c) { return std::to_string(c.delta); },
      [](C& c, const std::string& v) { c.delta = to_int<int>("delta", v); });
  add("zeta", "anomaly count parameter; predict when flags >= max(1, zeta/7)",
      [](const C& c) { return shortest(c.zeta); }, [](C& c, const std::string& v) { c.zeta = to_double("zeta", v); });
  add("anomaly_components", "principal components kept",
      [](const C& c) { return std::to_string(c.anomaly_components); },
      [](C& c, const std::string& v) { c.anomaly_components = to_int<Eigen::Index>("anomaly_components", v); });
  add("anomaly_normal", "components spanning the normal subspace",
      [](const C& c) { return std::to_string(c.anomaly_normal); },
      [](C& c, const std::string& v) { c.anomaly_normal = to_int<Eigen::Index>("anomaly_normal", v); });
  add("anomaly_threshold", "quantile:Q of training SPE, or absolute:V",
      [](const C& c) {
        return std::string(c.anomaly_threshold.kind == ThresholdSpec::Kind::Quantile ? "quantile:" : "absolute:") +
               shortest(c.anomaly_threshold.value);
      },
      [](C& c, const std::string& v) {
        const auto colon = v.find(':');
        const std::string kind = v.substr(0, colon);
        if (colon == std::string::npos || (kind != "quantile" && kind != "absolute")) {
          throw ConfigError("anomaly_threshold: expected quantile:Q or absolute:V");
        }
        c.anomaly_threshold.kind = kind == "quantile" ? ThresholdSpec::Kind::Quantile : ThresholdSpec::Kind::Absolute;
        c.anomaly_threshold.value = to_double("anomaly_threshold", v.substr(colon + 1));
      });
  add("split_ratio", "share of months used for training", [](const C& c) { return shortest(c.split_ratio); },
      [](C& c, const std::string& v) { c.split_ratio = to_double("split_ratio", v); });
  add("supervised_features", "features fed to the logistic model",
      [](const C& c) { return from_features(c.supervised_features); },
      [](C& c, const std::string& v) { c.supervised_features = to_features("supervised_features", v); });
  add("regularization", "ridge or group-lasso",
      [](const C& c) { return std::string(c.regularization == Regularization::Ridge ? "ridge" : "group-lasso"); },
      [](C& c, const std::string& v) {
        if (v == "ridge") c.regularization = Regularization::Ridge;
        else if (v == "group-lasso") c.regularization = Regularization::GroupLasso;
        else throw ConfigError("regularization: expected ridge or group-lasso");
      });
  add("lambda", "ridge penalty", [](const C& c) { return shortest(c.lambda); },
      [](C& c, const std::string& v) { c.lambda = to_double("lambda", v); });
  add("gl_m", "group lasso quadratic penalty", [](const C& c) { return shortest(c.penalty.m); },
      [](C& c, const std::string& v) { c.penalty.m = to_double("gl_m", v); });
  add("gl_l", "group lasso L1 penalty", [](const C& c) { return shortest(c.penalty.l); },
      [](C& c, const std::string& v) { c.penalty.l = to_double("gl_l", v); });
  add("gl_g", "group lasso group penalty", [](const C& c) { return shortest(c.penalty.g); },
      [](C& c, const std::string& v) { c.penalty.g = to_double("gl_g", v); });
  add("smote", "oversample the minority class", [](const C& c) { return std::string(c.smote ? "true" : "false"); },
      [](C& c, const std::string& v) { c.smote = to_bool("smote", v); });
  add("smote_k", "SMOTE neighbours", [](const C& c) { return std::to_string(c.smote_k); },
      [](C& c, const std::string& v) { c.smote_k = to_int<std::size_t>("smote_k", v); });
  add("smote_ratio", "minority:majority ratio after SMOTE", [](const C& c) { return shortest(c.smote_ratio); },
      [](C& c, const std::string& v) { c.smote_ratio = to_double("smote_ratio", v); });
  add("standardize", "z-score lag features with training statistics",
      [](const C& c) { return std::string(c.standardize ? "true" : "false"); },
      [](C& c, const std::string& v) { c.standardize = to_bool("standardize", v); });
  add("decision_threshold", "probability above which an attack is predicted",
      [](const C& c) { return shortest(c.decision_threshold); },
      [](C& c, const std::string& v) { c.decision_threshold = to_double("decision_threshold", v); });
  add("high_activity_more_than", "weekly incident count a high-activity week must exceed",
      [](const C& c) { return std::to_string(c.high_activity_more_than); },
      [](C& c, const std::string& v) { c.high_activity_more_than = to_int<int>("high_activity_more_than", v); });
  add("event_type", "malicious-email, endpoint-malware or malicious-destination",
      [](const C& c) { return std::string(to_string(c.event_type)); },
      [](C& c, const std::string& v) {
        auto t = parse_event_type(v);
        if (!t) throw ConfigError("event_type: unknown '" + v + "'");
        c.event_type = *t;
      });
  add("seed", "seed for community detection and sampling", [](const C& c) { return std::to_string(c.seed); },
      [](C& c, const std::string& v) {
        c.seed = to_int<std::uint64_t>("seed", v);
        c.feature.seed = c.seed;
      });
  add("threads", "worker threads", [](const C& c) { return std::to_string(c.threads); },
      [](C& c, const std::string& v) { c.threads = to_int<unsigned>("threads", v); });
  return k;
}

void emit(const Log& log, const std::string& msg) {
  if (log) log(msg);
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string() + " (run the earlier stage first)");
  return in;
}

void report_diagnostics(const Log& log, const fs::path& file, const std::vector<Diagnostic>& diags) {
  const std::size_t shown = std::min<std::size_t>(diags.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) {
    emit(log, file.string() + ":" + std::to_string(diags[i].line) + ": " + diags[i].message);
  }
  if (diags.size() > shown) emit(log, file.string() + ": " + std::to_string(diags.size() - shown) + " more");
}

void write_resolved(const PipelineConfig& config, const std::string& stage) {
  auto out = open_out(config.out / ("config." + stage + ".resolved"));
  write_config(out, config);
}

FeatureTable load_table(const PipelineConfig& config) {
  auto values = open_in(config.out / "features.csv");
  auto flags = open_in(config.out / "flags.csv");
  return read_feature_csv(values, &flags);
}

AttackLog load_attack_log(const PipelineConfig& config, const Log& log) {
  auto loaded = load_attacks(config.attacks);
  report_diagnostics(log, config.attacks, loaded.diagnostics);
  return std::move(loaded.log);
}

std::vector<AggregateSeries> aggregates(const FeatureTable& table, const std::vector<FeatureId>& features) {
  std::vector<AggregateSeries> out;
  for (auto f : features) {
    auto series = table.of(f);
    if (series.empty()) {
      throw ConfigError("feature " + std::string(to_string(f)) + " is not in features.csv; add it to 'features'");
    }
    out.push_back(forum_average(series));
  }
  return out;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  feature.construction.validate();
  if (subsequence_months < 1 || history_months < 1) throw ConfigError("window lengths must be at least one month");
  if (feature.top_k == 0) throw ConfigError("top_k must be positive");
  if (features.empty()) throw ConfigError("features must not be empty");
  if (eta < 1 || delta < 0) throw ConfigError("need eta >= 1 and delta >= 0");
  if (!(zeta > 0.0)) throw ConfigError("zeta must be positive");
  if (anomaly_normal < 0 || anomaly_components <= anomaly_normal) {
    throw ConfigError("need 0 <= anomaly_normal < anomaly_components");
  }
  if (anomaly_threshold.kind == ThresholdSpec::Kind::Quantile &&
      !(anomaly_threshold.value > 0.0 && anomaly_threshold.value < 1.0)) {
    throw ConfigError("anomaly threshold quantile must lie in (0, 1)");
  }
  if (anomaly_threshold.kind == ThresholdSpec::Kind::Absolute && !(anomaly_threshold.value >= 0.0)) {
    throw ConfigError("absolute anomaly threshold must be non-negative");
  }
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split_ratio must lie in (0, 1)");
  if (supervised_features.empty()) throw ConfigError("supervised_features must not be empty");
  if (!(lambda >= 0.0) || !(penalty.m >= 0.0) || !(penalty.l >= 0.0) || !(penalty.g >= 0.0)) {
    throw ConfigError("penalties must be non-negative");
  }
  if (smote_k == 0 || !(smote_ratio > 0.0)) throw ConfigError("SMOTE needs k >= 1 and a positive ratio");
  if (!(decision_threshold > 0.0 && decision_threshold < 1.0)) {
    throw ConfigError("decision_threshold must lie in (0, 1)");
  }
  if (threads == 0) throw ConfigError("threads must be at least 1");
  if (study_start && study_end && *study_end < *study_start) throw ConfigError("study_end precedes study_start");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

PipelineConfig read_config(std::istream& in, PipelineConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    set_config_value(base, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
  }
  return base;
}

void write_config(std::ostream& out, const PipelineConfig& config) {
  for (const auto& k : config_keys()) out << k.name << " = " << k.get(config) << '\n';
}

int report_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DegenerateError& e) {
    err << "degenerate input: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

IngestResult cmd_ingest(const PipelineConfig& config, const Log& log) {
  config.validate();
  IngestResult r;
  auto posts = load_posts(config.posts);
  report_diagnostics(log, config.posts, posts.diagnostics);
  r.diagnostics += posts.diagnostics.size();
  if (posts.corpus.post_count() == 0) throw DataError(config.posts.string() + ": no valid post records");
  r.forums_before_filter = posts.corpus.forums.size();

  auto attacks = load_attacks(config.attacks);
  report_diagnostics(log, config.attacks, attacks.diagnostics);
  r.diagnostics += attacks.diagnostics.size();
  r.attacks = std::move(attacks.log);

  auto cpe = load_cpe_map(config.cpe);
  report_diagnostics(log, config.cpe, cpe.diagnostics);
  r.diagnostics += cpe.diagnostics.size();
  r.cpe = std::move(cpe.map);

  ForumFilter filter;
  filter.min_posts = config.forum_min_posts;
  if (config.study_start || config.study_end) {
    const auto span = *posts.corpus.span();
    filter.study_window = DayRange{config.study_start.value_or(span.first), config.study_end.value_or(span.last)};
  }
  r.corpus = filter_forums(posts.corpus, filter);
  if (r.corpus.forums.empty()) {
    throw DataError("no forum has more than " + std::to_string(config.forum_min_posts) + " posts");
  }
  r.summary = summarize(r.corpus, &r.cpe);

  auto out = open_out(config.out / "summary.txt");
  out << "forums_loaded " << r.forums_before_filter << '\n'
      << "forums_kept " << r.summary.forums << '\n'
      << "threads " << r.summary.threads << '\n'
      << "posts " << r.summary.posts << '\n'
      << "users " << r.summary.users << '\n'
      << "cve_mentions " << r.summary.cve_mentions << '\n'
      << "distinct_cves " << r.summary.distinct_cves << '\n'
      << "unmapped_cves " << r.summary.unmapped_cves << '\n'
      << "span " << (r.summary.span ? format_range(*r.summary.span) : std::string("none")) << '\n'
      << "attack_records " << r.attacks.records.size() << '\n'
      << "diagnostics " << r.diagnostics << '\n';
  for (EventType t : kAllEventTypes) out << "attacks_" << to_string(t) << ' ' << r.attacks.total(t) << '\n';
  write_resolved(config, "ingest");
  emit(log, "ingest: kept " + std::to_string(r.summary.forums) + " of " + std::to_string(r.forums_before_filter) +
                " forums, " + std::to_string(r.summary.posts) + " posts");
  return r;
}

FeaturesResult cmd_features(const PipelineConfig& config, const Log& log) {
  auto ingest = cmd_ingest(config, log);
  FeaturesResult r;
  r.schedule = build_window_schedule(*ingest.corpus.span(), config.subsequence_months, config.history_months);
  FeatureParams params = config.feature;
  params.seed = config.seed;
  r.table = compute_feature_table(ingest.corpus, ingest.cpe, r.schedule, params, config.features, config.threads);

  {
    auto out = open_out(config.out / "features.csv");
    write_feature_csv(out, r.table);
  }
  {
    auto out = open_out(config.out / "flags.csv");
    write_flag_csv(out, r.table);
  }
  {
    auto out = open_out(config.out / "experts.tsv");
    out << "window\tforum\tuser\tindegree\trelation\n";
    for (const auto& pair : r.schedule.pairs) {
      for (const auto& forum : ingest.corpus.forums) {
        const auto hist = pair.history.days;
        const auto graph = create_graph(forum, hist, params.construction);
        const auto posts = posts_in(forum, hist);
        const auto ranking = rank_cpe_groups(posts, ingest.cpe, hist, params.top_k);
        const auto experts = extract_experts(graph, posts, ingest.cpe, ranking, params.indeg_threshold);
        write_experts(out, experts, ingest.corpus.users, forum.id, format_range(pair.subsequence.days));
      }
    }
  }
  write_resolved(config, "features");
  emit(log, "features: " + std::to_string(r.table.series.size()) + " series over " + format_range(r.table.span));
  return r;
}

DetectResult cmd_detect(const PipelineConfig& config, const Log& log) {
  config.validate();
  const auto table = load_table(config);
  const auto attacks = load_attack_log(config, log);
  const auto labels = attacks.series(config.event_type, table.span);
  DetectResult r;
  r.split = chrono_split(table.span, config.split_ratio);

  for (auto feature : table.features()) {
    const std::string name(to_string(feature));
    try {
      const auto series = table.of(feature);
      const auto matrix = assemble_matrix(series, table.span);
      const auto train_rows = static_cast<Eigen::Index>(r.split.train.size());
      const auto model =
          fit_subspace(matrix.values.topRows(train_rows), config.anomaly_components, config.anomaly_normal);
      SubspaceModel<double> tagged = model;
      tagged.feature = feature;
      auto spe = spe_series(tagged, matrix);
      flag_anomalies(spe, config.anomaly_threshold, r.split.train);

      const auto rule = predict_attacks_unsupervised(spe, r.split.test, config.eta, config.delta, config.zeta);
      const auto scores = window_scores(spe, r.split.test, config.eta, config.delta, config.zeta);

      std::vector<int> pred, truth;
      std::vector<double> score;
      auto out = open_out(config.out / ("predictions_unsupervised_" + name + ".csv"));
      out << "day,predictable,score,predicted,label\n";
      for (std::size_t i = 0; i < r.split.test.size(); ++i) {
        const Day d = r.split.test.at(i);
        out << format_date(d) << ',' << int(rule.predictable[i]) << ',' << g17(scores.score[i]) << ','
            << rule.predicted[i] << ',' << labels.label_on(d) << '\n';
        if (!rule.predictable[i]) continue;
        pred.push_back(rule.predicted[i]);
        truth.push_back(labels.label_on(d));
        score.push_back(scores.score[i]);
      }

      MetricsReport report = prf1(pred, truth);
      report.name = "unsupervised:" + name;
      report.unpredictable = rule.unpredictable();
      if (std::find(truth.begin(), truth.end(), 1) != truth.end() &&
          std::find(truth.begin(), truth.end(), 0) != truth.end()) {
        const auto roc = roc_auc(score, truth);
        report.auc = roc.auc;
        auto roc_out = open_out(config.out / ("roc_unsupervised_" + name + ".csv"));
        write_roc_csv(roc_out, roc);
      }
      report.config = {{"feature", name},
                       {"event_type", std::string(to_string(config.event_type))},
                       {"eta", std::to_string(config.eta)},
                       {"delta", std::to_string(config.delta)},
                       {"zeta", shortest(config.zeta)},
                       {"K", std::to_string(config.anomaly_components)},
                       {"r", std::to_string(config.anomaly_normal)},
                       {"spe_threshold", g17(spe.threshold)}};
      r.reports.push_back(std::move(report));

      auto model_out = open_out(config.out / ("model_subspace_" + name + ".txt"));
      write_subspace_model(model_out, tagged, matrix.forums, spe.threshold);
      auto spe_out = open_out(config.out / ("spe_" + name + ".csv"));
      spe_out << "day,spe,flag\n";
      for (std::size_t i = 0; i < spe.spe.size(); ++i) {
        spe_out << format_date(spe.span.at(i)) << ',' << g17(spe.spe[i]) << ',' << int(spe.flags[i]) << '\n';
      }
    } catch (const DegenerateError& e) {
      r.failures.emplace_back(feature, e.what());
    } catch (const ConfigError& e) {
      r.failures.emplace_back(feature, e.what());
    }
  }
  for (const auto& [f, why] : r.failures) emit(log, "detect: " + std::string(to_string(f)) + " skipped: " + why);

  auto csv = open_out(config.out / "report_detect.csv");
  write_report_csv(csv, r.reports);
  auto txt = open_out(config.out / "report_detect.txt");
  txt << "split train " << format_range(r.split.train) << " test " << format_range(r.split.test) << '\n';
  write_report_table(txt, r.reports);
  for (const auto& [f, why] : r.failures) txt << "skipped " << to_string(f) << ": " << why << '\n';
  write_resolved(config, "detect");
  if (r.reports.empty() && !r.failures.empty()) throw DegenerateError("no feature could be modelled");
  return r;
}

TrainResult cmd_train(const PipelineConfig& config, const Log& log) {
  config.validate();
  const auto table = load_table(config);
  const auto attacks = load_attack_log(config, log);
  const auto labels = attacks.series(config.event_type, table.span);
  TrainResult r;
  r.split = chrono_split(table.span, config.split_ratio);
  const auto aggs = aggregates(table, config.supervised_features);
  const auto design = build_lag_features(aggs, labels, config.eta, config.delta, r.split.train);
  r.rows = static_cast<std::size_t>(design.X.rows());
  r.positives = static_cast<std::size_t>(design.y.sum());

  TrainConfig tc;
  tc.eta = config.eta;
  tc.delta = config.delta;
  tc.standardize = config.standardize;
  tc.smote = config.smote;
  tc.smote_k = config.smote_k;
  tc.smote_ratio = config.smote_ratio;
  tc.seed = config.seed;
  r.trained = config.regularization == Regularization::Ridge
                  ? train_ridge_logit(design, config.lambda, tc, config.event_type)
                  : train_group_lasso_logit(design, config.penalty, tc, config.event_type);
  r.trained.model.decision_threshold = config.decision_threshold;

  auto out = open_out(config.out / "model_logit.txt");
  write_logit_model(out, r.trained.model);
  auto probs = open_out(config.out / "training_probabilities.csv");
  probs << "day,probability,label\n";
  const auto preds = predict(r.trained.model, design.X);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    probs << format_date(design.days[i]) << ',' << g17(preds[i].probability) << ','
          << static_cast<int>(design.y(static_cast<Eigen::Index>(i))) << '\n';
  }
  write_resolved(config, "train");
  emit(log, "train: " + std::to_string(r.rows) + " rows, " + std::to_string(r.positives) + " positive, " +
                std::to_string(r.trained.trace.iterations) + " iterations");
  return r;
}

PredictResult cmd_predict(const PipelineConfig& config, bool all_days, const Log& log) {
  config.validate();
  auto model_in = open_in(config.out / "model_logit.txt");
  const auto model = read_logit_model(model_in);
  const auto table = load_table(config);
  const auto attacks = load_attack_log(config, log);
  const auto labels = attacks.series(model.event_type, table.span);
  const auto split = chrono_split(table.span, config.split_ratio);
  const auto aggs = aggregates(table, model.features);
  const auto design = build_lag_features(aggs, labels, model.eta, model.delta, all_days ? table.span : split.test);

  PredictResult r;
  r.days = design.days;
  r.predictions = predict(model, design.X);
  auto out = open_out(config.out / "predictions_supervised.csv");
  out << "day,probability,predicted,label\n";
  for (std::size_t i = 0; i < r.days.size(); ++i) {
    out << format_date(r.days[i]) << ',' << g17(r.predictions[i].probability) << ',' << r.predictions[i].label << ','
        << static_cast<int>(design.y(static_cast<Eigen::Index>(i))) << '\n';
  }
  write_resolved(config, "predict");
  emit(log, "predict: " + std::to_string(r.days.size()) + " days, " + std::to_string(design.excluded.size()) +
                " without full history");
  return r;
}

EvaluateResult cmd_evaluate(const PipelineConfig& config, const Log& log) {
  config.validate();
  auto in = open_in(config.out / "predictions_supervised.csv");
  std::string line;
  std::getline(in, line);
  std::vector<Day> days;
  std::vector<double> prob;
  std::vector<int> pred;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string day, p, l;
    std::getline(ss, day, ',');
    std::getline(ss, p, ',');
    std::getline(ss, l, ',');
    days.push_back(parse_date(day));
    prob.push_back(to_double("probability", p));
    pred.push_back(to_int<int>("predicted", l));
  }
  if (days.empty()) throw DataError("predictions_supervised.csv has no rows");
  const auto attacks = load_attack_log(config, log);
  const DayRange span{days.front(), days.back()};
  const auto labels = attacks.series(config.event_type, span);
  std::vector<int> truth;
  for (auto d : days) truth.push_back(labels.label_on(d));

  auto describe = [&](MetricsReport& rep, const std::string& name) {
    rep.name = name;
    rep.config = {{"features", from_features(config.supervised_features)},
                  {"event_type", std::string(to_string(config.event_type))},
                  {"eta", std::to_string(config.eta)},
                  {"delta", std::to_string(config.delta)},
                  {"regularization", config.regularization == Regularization::Ridge ? "ridge" : "group-lasso"},
                  {"decision_threshold", shortest(config.decision_threshold)}};
  };

  EvaluateResult r;
  r.overall = prf1(pred, truth);
  describe(r.overall, "supervised");
  const bool both = std::find(truth.begin(), truth.end(), 1) != truth.end() &&
                    std::find(truth.begin(), truth.end(), 0) != truth.end();
  if (both) {
    const auto roc = roc_auc(prob, truth);
    r.overall.auc = roc.auc;
    auto roc_out = open_out(config.out / "roc_supervised.csv");
    write_roc_csv(roc_out, roc);
  }

  const auto mask = high_activity_filter(labels, span, config.high_activity_more_than);
  std::vector<int> hp, ht;
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (mask[static_cast<std::size_t>(span.index_of(days[i]))]) {
      hp.push_back(pred[i]);
      ht.push_back(truth[i]);
    }
  }
  r.high_activity_days = hp.size();
  r.high_activity = prf1(hp, ht);
  describe(r.high_activity, "supervised:high-activity-weeks");

  const std::vector<MetricsReport> reports{r.overall, r.high_activity};
  auto csv = open_out(config.out / "report_evaluate.csv");
  write_report_csv(csv, reports);
  auto txt = open_out(config.out / "report_evaluate.txt");
  write_report_table(txt, reports);
  txt << "high-activity days: " << r.high_activity_days << '\n';
  write_resolved(config, "evaluate");
  emit(log, "evaluate: F1 " + shortest(r.overall.f1) + " (prior baseline " + shortest(r.overall.prior_baseline_f1) +
                ")");
  return r;
}

SyntheticCorpus cmd_simulate(const SyntheticScenario& scenario, const fs::path& out_dir, const Log& log) {
  auto result = synthesize_corpus(scenario);
  {
    auto out = open_out(out_dir / "posts.tsv");
    write_posts(out, result.corpus);
  }
  {
    auto out = open_out(out_dir / "attacks.tsv");
    write_attacks(out, result.attacks);
  }
  {
    auto out = open_out(out_dir / "cpe.tsv");
    write_cpe_map(out, result.cpe);
  }
  {
    auto out = open_out(out_dir / "plan.txt");
    write_plan(out, result.plan);
  }
  {
    auto out = open_out(out_dir / "scenario.txt");
    write_scenario(out, scenario);
  }
  emit(log, "simulate: " + std::to_string(result.plan.posts) + " posts, " + std::to_string(result.plan.bursts.size()) +
                " planted attacks");
  return result;
}

PipelineConfig config_for_simulation(const fs::path& dir, PipelineConfig base) {
  base.posts = dir / "posts.tsv";
  base.attacks = dir / "attacks.tsv";
  base.cpe = dir / "cpe.tsv";
  base.out = dir / "out";
  return base;
}

}  // namespace darkwatch
