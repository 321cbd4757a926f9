// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "darkwatch/anomaly.hpp"
#include "darkwatch/corpus.hpp"
#include "darkwatch/evaluation.hpp"
#include "darkwatch/features.hpp"
#include "darkwatch/supervised.hpp"
#include "darkwatch/synthetic.hpp"

namespace darkwatch {

struct PipelineConfig {
  std::filesystem::path posts = "posts.tsv";
  std::filesystem::path attacks = "attacks.tsv";
  std::filesystem::path cpe = "cpe.tsv";
  std::filesystem::path out = "out";

  std::size_t forum_min_posts = 5000;
  std::optional<Day> study_start;
  std::optional<Day> study_end;

  FeatureParams feature;  // construction thresholds, expert and walk settings, seed
  int subsequence_months = 1;
  int history_months = 3;
  std::vector<FeatureId> features{std::begin(kAllFeatures), std::end(kAllFeatures)};

  int eta = 7;
  int delta = 8;
  double zeta = 1.0;
  Eigen::Index anomaly_components = 8;
  Eigen::Index anomaly_normal = 3;
  ThresholdSpec anomaly_threshold;

  double split_ratio = 0.7;
  std::vector<FeatureId> supervised_features{FeatureId::Conductance};
  Regularization regularization = Regularization::Ridge;
  double lambda = 1.0;
  GroupLassoPenalty penalty;
  bool smote = false;
  std::size_t smote_k = 5;
  double smote_ratio = 1.0;
  bool standardize = true;
  double decision_threshold = 0.5;
  int high_activity_more_than = 5;

  EventType event_type = EventType::MaliciousEmail;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// One documented configuration key.
struct ConfigKey {
  std::string name;
  std::string help;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
  bool is_path = false;
};

const std::vector<ConfigKey>& config_keys();

/// Applies one `key = value` assignment. Unknown keys are a ConfigError.
void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value);
/// Flat `key = value` text; `#` starts a comment.
PipelineConfig read_config(std::istream& in, PipelineConfig base = {});
void write_config(std::ostream& out, const PipelineConfig& config);

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitData = 3, kExitDegenerate = 4 };

/// Maps the active exception to an exit code and writes its message.
int report_exception(std::ostream& err);

/// Log sink for progress lines; null discards.
using Log = std::function<void(const std::string&)>;

struct IngestResult {
  Corpus corpus;
  AttackLog attacks;
  CpeMap cpe;
  CorpusSummary summary;
  std::size_t forums_before_filter = 0;
  std::size_t diagnostics = 0;
};

IngestResult cmd_ingest(const PipelineConfig& config, const Log& log = {});

struct FeaturesResult {
  FeatureTable table;
  WindowSchedule schedule;
};

FeaturesResult cmd_features(const PipelineConfig& config, const Log& log = {});

struct DetectResult {
  SplitSpec split;
  std::vector<MetricsReport> reports;
  /// Features whose model could not be fitted, with the reason.
  std::vector<std::pair<FeatureId, std::string>> failures;
};

DetectResult cmd_detect(const PipelineConfig& config, const Log& log = {});

struct TrainResult {
  SplitSpec split;
  TrainedModel trained;
  std::size_t rows = 0;
  std::size_t positives = 0;
};

TrainResult cmd_train(const PipelineConfig& config, const Log& log = {});

struct PredictResult {
  std::vector<Day> days;
  std::vector<Prediction> predictions;
};

/// Predicts every test day of the split (or every predictable day when
/// `all_days`).
PredictResult cmd_predict(const PipelineConfig& config, bool all_days = false, const Log& log = {});

struct EvaluateResult {
  MetricsReport overall;
  MetricsReport high_activity;
  std::size_t high_activity_days = 0;
};

EvaluateResult cmd_evaluate(const PipelineConfig& config, const Log& log = {});

/// Writes posts, attacks, CPE map, plan and the resolved scenario into
/// `out_dir`.
SyntheticCorpus cmd_simulate(const SyntheticScenario& scenario, const std::filesystem::path& out_dir,
                             const Log& log = {});

/// Config whose paths point at the files cmd_simulate writes in `dir`.
PipelineConfig config_for_simulation(const std::filesystem::path& dir, PipelineConfig base = {});

}  // namespace darkwatch
