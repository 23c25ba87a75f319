#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rtprop/domain.hpp"
#include "rtprop/fit.hpp"
#include "rtprop/partition.hpp"
#include "rtprop/simulator.hpp"

namespace rtprop {

/// Fully resolved job description: config file merged with CLI overrides.
/// N and tau always come from here, never from the data (nonrespondents
/// are absent from the CSV by design).
struct RunConfig {
  std::string command;  // fit | simulate | diagnose | compare | mc-study
  std::string input_path;
  std::string out_path;
  std::string series_out;    // optional tidy-CSV export of diagnostics
  std::string dataset_out;   // simulate: where the CSV + truth sidecar go
  std::string strata_path;   // compare: stratum table CSV
  std::int64_t population_size = 0;
  double censor_time = 0.0;
  Calendar calendar;
  PartitionSpec partition;
  FitConfig fit;
  std::optional<double> assumed_pi;    // diagnose; empty = use fitted pi
  bool include_weekends = false;       // diagnose: keep weekend/holiday ratio rows
  std::optional<double> horizon_days;  // compare; empty = tau * N / n
  std::optional<ScenarioConfig> scenario;
  int replicates = 200;
  int threads = 0;  // mc-study worker count; 0 = hardware concurrency
  std::uint64_t seed = 0;
  bool debug_likelihood = false;  // embed a likelihood evaluation in the report
};

/// Flags accepted by the CLI; every one of them overrides the config file.
struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::string> input;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> command;
  std::optional<std::string> partition;
};

struct RunOutcome {
  int exit_code = 0;
  std::string report_json;  // full report; may accompany a nonzero exit
  std::string error_json;   // {"error": {"category", "message"}} when nonzero
  bool wrote_report_file = false;
};

RunConfig load_run_config(const CliOverrides& cli);

/// Executes cfg.command and writes the report to cfg.out_path when set.
/// Identical config + seed produce byte-identical report bodies apart from
/// the "timing" object. Failures come back as exit codes per
/// rtprop::exit_code, never as exceptions.
RunOutcome run(const RunConfig& cfg);
RunOutcome run(const CliOverrides& cli);

}  // namespace rtprop
