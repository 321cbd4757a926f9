// Copyright 2026 The darkwatch Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver: one subcommand per pipeline stage.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "darkwatch/error.hpp"
#include "darkwatch/pipeline.hpp"

namespace {

using darkwatch::PipelineConfig;

const std::map<std::string, const char*> kPathEnv = {
    {"posts", "DARKWATCH_POSTS"}, {"attacks", "DARKWATCH_ATTACKS"}, {"cpe", "DARKWATCH_CPE"}, {"out", "DARKWATCH_OUT"}};

std::string flag_name(const std::string& key) {
  std::string out = key;
  for (auto& c : out) c = c == '_' ? '-' : c;
  return "--" + out;
}

// Precedence: defaults, config file, environment (paths only), flags.
PipelineConfig resolve(const std::string& config_file, const std::map<std::string, std::string>& flags) {
  PipelineConfig config;
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw darkwatch::ConfigError("cannot read config file " + config_file);
    config = darkwatch::read_config(in, config);
  }
  for (const auto& [key, var] : kPathEnv) {
    if (const char* v = std::getenv(var); v && *v) darkwatch::set_config_value(config, key, v);
  }
  for (const auto& [key, value] : flags) darkwatch::set_config_value(config, key, value);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"darkwatch: forecast cyber-attacks from darkweb reply graphs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  std::map<std::string, std::string> flags;
  app.add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
  for (const auto& key : darkwatch::config_keys()) {
    app.add_option_function<std::string>(
           flag_name(key.name), [&flags, name = key.name](const std::string& v) { flags[name] = v; }, key.help)
        ->type_name(key.is_path ? "PATH" : "VALUE");
  }

  auto* ingest = app.add_subcommand("ingest", "load inputs, filter forums, write a corpus summary");
  auto* features = app.add_subcommand("features", "build reply graphs, experts and daily feature series");
  auto* detect = app.add_subcommand("detect", "subspace anomaly detection and unsupervised prediction");
  auto* train = app.add_subcommand("train", "fit the logistic model on the training split");
  auto* predict = app.add_subcommand("predict", "apply the trained model");
  bool all_days = false;
  predict->add_flag("--all-days", all_days, "predict every day with full lag history, not only test days");
  auto* evaluate = app.add_subcommand("evaluate", "score supervised predictions against attack labels");
  auto* simulate = app.add_subcommand("simulate", "write a synthetic corpus with planted attacks");
  std::string scenario_file;
  std::string sim_dir;
  simulate->add_option("--scenario", scenario_file, "scenario file (defaults when omitted)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--dir", sim_dir, "output directory")->required();
  auto* keys = app.add_subcommand("keys", "list config keys with their defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? darkwatch::kExitOk : darkwatch::kExitUsage;
  }

  const darkwatch::Log log = [](const std::string& line) { std::cerr << line << '\n'; };
  try {
    if (keys->parsed()) {
      const PipelineConfig defaults;
      for (const auto& k : darkwatch::config_keys()) {
        std::cout << k.name << " = " << k.get(defaults) << "    # " << k.help << '\n';
      }
      return darkwatch::kExitOk;
    }
    if (simulate->parsed()) {
      darkwatch::SyntheticScenario scenario;
      if (!scenario_file.empty()) {
        std::ifstream in(scenario_file);
        scenario = darkwatch::read_scenario(in);
      }
      darkwatch::cmd_simulate(scenario, sim_dir, log);
      return darkwatch::kExitOk;
    }
    const PipelineConfig config = resolve(config_file, flags);
    if (ingest->parsed()) darkwatch::cmd_ingest(config, log);
    else if (features->parsed()) darkwatch::cmd_features(config, log);
    else if (detect->parsed()) {
      const auto r = darkwatch::cmd_detect(config, log);
      darkwatch::write_report_table(std::cout, r.reports);
    } else if (train->parsed()) darkwatch::cmd_train(config, log);
    else if (predict->parsed()) darkwatch::cmd_predict(config, all_days, log);
    else if (evaluate->parsed()) {
      const auto r = darkwatch::cmd_evaluate(config, log);
      const std::vector<darkwatch::MetricsReport> reports{r.overall, r.high_activity};
      darkwatch::write_report_table(std::cout, reports);
    }
    return darkwatch::kExitOk;
  } catch (...) {
    return darkwatch::report_exception(std::cerr);
  }
}
