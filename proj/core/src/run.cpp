#include "rtprop/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <thread>

#include "rtprop/csv.hpp"
#include "rtprop/error.hpp"
#include "json_io.hpp"
#include "rng_util.hpp"

namespace rtprop {

using nlohmann::json;

namespace {

SurveyDataset load_input(const RunConfig& cfg) {
  if (cfg.input_path.empty()) {
    throw Error(ErrorCategory::validation,
                "command '" + cfg.command + "' needs an input CSV (--input)");
  }
  if (cfg.population_size < 1 || !(cfg.censor_time > 0.0)) {
    throw Error(ErrorCategory::validation,
                "population_size and censor_time must be configured");
  }
  auto d = read_dataset_csv(cfg.input_path, cfg.population_size, cfg.censor_time,
                            cfg.calendar);
  auto broken = break_ties(d, cfg.fit.tie_seed);
  if (auto findings = validate_dataset(broken); !findings.empty()) {
    throw Error(ErrorCategory::validation,
                "input failed validation: " + to_string(findings.front()));
  }
  return broken;
}

void command_fit(const RunConfig& cfg, json& report, std::vector<std::string>& warnings) {
  auto d = load_input(cfg);
  auto partition = resolve_partition(cfg.partition, cfg.censor_time, cfg.calendar);
  auto result = fit(d, partition, cfg.fit);
  report["fit"] = detail::fit_result_to_json(result);
  report["comparators"]["sample_proportion"] =
      detail::estimate_to_json(sample_proportion(d));
  if (result.weak_identification_warning.has_value()) {
    warnings.push_back(*result.weak_identification_warning);
  }
  if (result.status == FitStatus::boundary) {
    warnings.push_back("pi_hat pinned at the feasibility boundary; estimates reported");
  }
  if (cfg.debug_likelihood) {
    auto table = EventTable::build(d, partition);
    EvalRequest req;
    req.score = true;
    req.hessian = true;
    req.per_event_terms = true;
    ModelParams params{result.pi_hat, result.rho_hat};
    report["likelihood_at_solution"] = detail::evaluation_to_json(
        evaluate(table, params, req));
  }
  if (result.status == FitStatus::not_converged) {
    throw Error(ErrorCategory::not_converged,
                "fit did not converge in " + std::to_string(result.iterations) +
                    " iterations (gradient norm " +
                    std::to_string(result.gradient_norm_at_exit) + ")");
  }
  if (result.status == FitStatus::singular_information) {
    throw Error(ErrorCategory::not_converged,
                "information matrix singular at the solution");
  }
}

void command_simulate(const RunConfig& cfg, json& report) {
  if (!cfg.scenario.has_value()) {
    throw Error(ErrorCategory::validation, "simulate needs a scenario block");
  }
  if (cfg.dataset_out.empty()) {
    throw Error(ErrorCategory::validation, "simulate needs dataset_out");
  }
  auto sim = simulate_survey(*cfg.scenario);
  write_dataset_csv(cfg.dataset_out, sim.dataset);

  json truth;
  truth["true_pi"] = sim.true_pi;
  truth["n_group1"] = sim.n_group1;
  truth["n_responded"] = sim.n_responded;
  truth["population_size"] = cfg.scenario->population_size;
  truth["seed"] = cfg.seed;
  const std::string truth_path = cfg.dataset_out + ".truth.json";
  std::ofstream tf(truth_path);
  if (!tf) {
    throw Error(ErrorCategory::io, "cannot write '" + truth_path + "'");
  }
  tf << truth.dump(2) << "\n";

  json s;
  s["dataset_out"] = cfg.dataset_out;
  s["truth_out"] = truth_path;
  s["n_responded"] = sim.n_responded;
  s["unit_response_rate"] =
      static_cast<double>(sim.n_responded) /
      static_cast<double>(cfg.scenario->population_size);
  s["true_pi"] = sim.true_pi;
  const bool any_labeled =
      std::any_of(sim.dataset.records.begin(), sim.dataset.records.end(),
                  [](const ResponseRecord& r) { return r.observed; });
  if (any_labeled) {
    s["labeled_sample_proportion"] = sample_proportion(sim.dataset).value;
  }
  report["simulate"] = std::move(s);
}

void command_diagnose(const RunConfig& cfg, json& report,
                      std::vector<std::string>& warnings) {
  auto d = load_input(cfg);
  auto daily = daily_proportion_series(d);

  double assumed_pi;
  if (cfg.assumed_pi.has_value()) {
    assumed_pi = *cfg.assumed_pi;
  } else {
    auto partition = resolve_partition(cfg.partition, cfg.censor_time, cfg.calendar);
    auto result = fit(d, partition, cfg.fit);
    report["fit"] = detail::fit_result_to_json(result);
    if (result.weak_identification_warning.has_value()) {
      warnings.push_back(*result.weak_identification_warning);
    }
    assumed_pi = result.pi_hat;
  }
  auto ratio = hazard_ratio_series(d, assumed_pi, cfg.include_weekends);
  auto trend = log_ratio_trend(ratio);

  report["diagnostics"]["assumed_pi"] = assumed_pi;
  report["diagnostics"]["daily_proportion"] = detail::daily_rows_to_json(daily);
  report["diagnostics"]["hazard_ratio"] = detail::ratio_rows_to_json(ratio);
  report["diagnostics"]["log_ratio_trend"] = detail::trend_to_json(trend);
  report["comparators"]["sample_proportion"] =
      detail::estimate_to_json(sample_proportion(d));
  if (!cfg.series_out.empty()) {
    write_series_csv(cfg.series_out, daily, ratio);
    report["diagnostics"]["series_out"] = cfg.series_out;
  }
}

void command_compare(const RunConfig& cfg, json& report) {
  auto d = load_input(cfg);
  report["comparators"]["sample_proportion"] =
      detail::estimate_to_json(sample_proportion(d));
  if (!cfg.strata_path.empty()) {
    auto table = read_stratum_csv(cfg.strata_path);
    report["comparators"]["poststratified"] = detail::estimate_to_json(poststratify(table));
  }
  const double horizon =
      cfg.horizon_days.value_or(default_extrapolation_horizon(d));
  auto daily = daily_proportion_series(d);
  json ex;
  ex["horizon_days"] = horizon;
  ex["estimate"] = extrapolate_trend(daily, horizon);
  report["comparators"]["extrapolation"] = std::move(ex);
}

struct Replicate {
  std::uint64_t seed = 0;
  double true_pi = 0.0;
  double pi_hat = 0.0;
  double pi_se = 0.0;
  bool converged = false;
  bool covered = false;
};

void command_mc_study(const RunConfig& cfg, json& report) {
  if (!cfg.scenario.has_value()) {
    throw Error(ErrorCategory::validation, "mc-study needs a scenario block");
  }
  if (cfg.replicates < 1) {
    throw Error(ErrorCategory::validation, "mc-study needs replicates >= 1");
  }
  const auto n = static_cast<std::size_t>(cfg.replicates);
  std::vector<Replicate> rows(n);

  auto run_one = [&](std::size_t i) {
    std::uint64_t stream = cfg.seed + 0x9e3779b97f4a7c15ULL * (i + 1);
    ScenarioConfig sc = *cfg.scenario;
    sc.rng_seed = detail::splitmix64(stream);
    auto sim = simulate_survey(sc);
    auto partition = resolve_partition(cfg.partition, sc.censor_time, sc.calendar);
    FitConfig fc = cfg.fit;
    fc.tie_seed = sc.rng_seed;
    Replicate r;
    r.seed = sc.rng_seed;
    r.true_pi = sim.true_pi;
    try {
      auto result = fit(sim.dataset, partition, fc);
      r.pi_hat = result.pi_hat;
      r.pi_se = result.pi_se;
      r.converged = result.converged;
      r.covered = std::abs(result.pi_hat - sim.true_pi) <= 1.96 * result.pi_se;
    } catch (const Error&) {
      r.converged = false;
    }
    rows[i] = r;
  };

  // Replicates are independent and written by index, so the schedule cannot
  // change the result.
  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      futures.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < n; i += workers) run_one(i);
      }));
    }
    for (auto& f : futures) f.get();
  }

  std::size_t n_conv = 0;
  std::size_t n_cov = 0;
  double sum_hat = 0.0, sum_hat2 = 0.0, sum_se = 0.0;
  for (const auto& r : rows) {
    if (!r.converged) continue;
    ++n_conv;
    if (r.covered) ++n_cov;
    sum_hat += r.pi_hat;
    sum_hat2 += r.pi_hat * r.pi_hat;
    sum_se += r.pi_se;
  }
  json summary;
  summary["replicates"] = cfg.replicates;
  summary["converged"] = n_conv;
  if (n_conv > 1) {
    const double mean_hat = sum_hat / static_cast<double>(n_conv);
    const double var_hat = (sum_hat2 - sum_hat * mean_hat) /
                           static_cast<double>(n_conv - 1);
    const double mean_se = sum_se / static_cast<double>(n_conv);
    summary["coverage_95"] = static_cast<double>(n_cov) / static_cast<double>(n_conv);
    summary["mean_pi_hat"] = mean_hat;
    summary["sd_pi_hat"] = std::sqrt(std::max(var_hat, 0.0));
    summary["mean_pi_se"] = mean_se;
    summary["sd_over_mean_se"] = std::sqrt(std::max(var_hat, 0.0)) / mean_se;
  }
  json reps = json::array();
  for (const auto& r : rows) {
    reps.push_back({{"seed", r.seed},
                    {"true_pi", r.true_pi},
                    {"pi_hat", r.pi_hat},
                    {"pi_se", r.pi_se},
                    {"converged", r.converged},
                    {"covered", r.covered}});
  }
  report["mc_study"]["summary"] = std::move(summary);
  report["mc_study"]["replicates"] = std::move(reps);
}

}  // namespace

RunConfig load_run_config(const CliOverrides& cli) {
  json j = json::object();
  if (cli.config_path.has_value()) {
    std::ifstream in(*cli.config_path);
    if (!in) {
      throw Error(ErrorCategory::io, "cannot open config '" + *cli.config_path + "'");
    }
    j = json::parse(in, nullptr, true, true);  // comments allowed
  }
  if (cli.command) j["command"] = *cli.command;
  if (cli.input) j["input"] = *cli.input;
  if (cli.out) j["out"] = *cli.out;
  if (cli.seed) {
    j["seed"] = *cli.seed;
    if (j.contains("fit")) j["fit"].erase("tie_seed");  // --seed wins
  }
  if (cli.partition) j["partition"] = *cli.partition;
  return detail::config_from_json(j);
}

RunOutcome run(const RunConfig& cfg) {
  RunOutcome outcome;
  json report;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    report["schema_version"] = 1;
    report["command"] = cfg.command;
    report["config"] = detail::config_echo(cfg);
    std::vector<std::string> warnings;

    if (cfg.command == "fit") {
      command_fit(cfg, report, warnings);
    } else if (cfg.command == "simulate") {
      command_simulate(cfg, report);
    } else if (cfg.command == "diagnose") {
      command_diagnose(cfg, report, warnings);
    } else if (cfg.command == "compare") {
      command_compare(cfg, report);
    } else if (cfg.command == "mc-study") {
      command_mc_study(cfg, report);
    } else {
      throw Error(ErrorCategory::validation,
                  cfg.command.empty() ? "no command given (--command)"
                                      : "unknown command '" + cfg.command + "'");
    }
    report["warnings"] = warnings;
  } catch (const Error& e) {
    json err;
    err["error"]["category"] = to_string(e.category());
    err["error"]["message"] = e.what();
    outcome.error_json = err.dump(2);
    outcome.exit_code = exit_code(e.category());
    // A categorized failure can still carry the partial report.
    if (report.contains("fit")) {
      report["warnings"] = json::array({e.what()});
      const auto dt = std::chrono::steady_clock::now() - t0;
      report["timing"]["seconds"] =
          std::chrono::duration<double>(dt).count();
      outcome.report_json = report.dump(2);
    }
    return outcome;
  } catch (const std::exception& e) {
    json err;
    err["error"]["category"] = "io";
    err["error"]["message"] = e.what();
    outcome.error_json = err.dump(2);
    outcome.exit_code = exit_code(ErrorCategory::io);
    return outcome;
  }

  const auto dt = std::chrono::steady_clock::now() - t0;
  report["timing"]["seconds"] = std::chrono::duration<double>(dt).count();
  outcome.report_json = report.dump(2);

  if (!cfg.out_path.empty()) {
    std::ofstream out(cfg.out_path);
    if (!out) {
      outcome.exit_code = exit_code(ErrorCategory::io);
      json err;
      err["error"]["category"] = "io";
      err["error"]["message"] = "cannot write report to '" + cfg.out_path + "'";
      outcome.error_json = err.dump(2);
      return outcome;
    }
    out << outcome.report_json << "\n";
    outcome.wrote_report_file = true;
  }
  return outcome;
}

RunOutcome run(const CliOverrides& cli) {
  try {
    return run(load_run_config(cli));
  } catch (const Error& e) {
    RunOutcome outcome;
    json err;
    err["error"]["category"] = to_string(e.category());
    err["error"]["message"] = e.what();
    outcome.error_json = err.dump(2);
    outcome.exit_code = exit_code(e.category());
    return outcome;
  } catch (const std::exception& e) {
    RunOutcome outcome;
    json err;
    err["error"]["category"] = "io";
    err["error"]["message"] = e.what();
    outcome.error_json = err.dump(2);
    outcome.exit_code = exit_code(ErrorCategory::io);
    return outcome;
  }
}

}  // namespace rtprop
