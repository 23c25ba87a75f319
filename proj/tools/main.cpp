// rtprop command line: estimates population proportions from right-censored
// response-time paradata, with a synthetic-survey simulator, comparator
// estimators, and diagnostic series. See README.md for the config schema.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rtprop/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "rtprop: population proportion estimation from survey response times"};

  std::string config_path;
  std::string input;
  std::string out;
  std::string command;
  std::string partition;
  std::uint64_t seed = 0;
  bool seed_given = false;

  app.add_option("--config", config_path, "JSON config file (see README)");
  app.add_option("--input", input, "input CSV with columns time,label");
  app.add_option("--out", out, "where to write the JSON report");
  app.add_option("--command", command,
                 "fit | simulate | diagnose | compare | mc-study");
  app.add_option("--partition", partition,
                 "partition shorthand: constant, weekday-classes, "
                 "every-<k>-weekdays, breakpoints:a,b");
  app.add_option("--seed", seed, "seed for simulation and tie-breaking")
      ->each([&](const std::string&) { seed_given = true; });

  CLI11_PARSE(app, argc, argv);

  rtprop::CliOverrides cli;
  if (!config_path.empty()) cli.config_path = config_path;
  if (!input.empty()) cli.input = input;
  if (!out.empty()) cli.out = out;
  if (!command.empty()) cli.command = command;
  if (!partition.empty()) cli.partition = partition;
  if (seed_given) cli.seed = seed;

  const auto outcome = rtprop::run(cli);
  if (!outcome.error_json.empty()) {
    std::cerr << outcome.error_json << "\n";
  }
  if (!outcome.report_json.empty() && !outcome.wrote_report_file) {
    std::cout << outcome.report_json << "\n";
  }
  return outcome.exit_code;
}
