#include "json_io.hpp"

#include <fstream>

#include "rtprop/error.hpp"

namespace rtprop::detail {

using nlohmann::json;

json calendar_to_json(const Calendar& cal) {
  json j;
  if (!cal.explicit_tags().empty()) {
    json days = json::object();
    for (const auto& [day, cls] : cal.explicit_tags()) {
      days[std::to_string(day)] = to_string(cls);
    }
    j["days"] = std::move(days);
  } else {
    j["start"] = to_string(static_cast<DayClass>(cal.start_offset()));
    j["holidays"] = json::array();
    for (int h : cal.holidays()) j["holidays"].push_back(h);
  }
  return j;
}

Calendar calendar_from_json(const json& j) {
  if (j.is_null()) return Calendar{};
  if (j.is_string()) {
    // Calendar file with the same object schema.
    std::ifstream in(j.get<std::string>());
    if (!in) {
      throw Error(ErrorCategory::io,
                  "cannot open calendar file '" + j.get<std::string>() + "'");
    }
    json inner = json::parse(in, nullptr, true, true);
    return calendar_from_json(inner);
  }
  if (j.contains("days")) {
    std::map<int, DayClass> tags;
    for (const auto& [key, value] : j.at("days").items()) {
      auto cls = day_class_from_string(value.get<std::string>());
      if (!cls) {
        throw Error(ErrorCategory::validation,
                    "unknown day class '" + value.get<std::string>() + "' in calendar");
      }
      tags[std::stoi(key)] = *cls;
    }
    return Calendar::from_map(std::move(tags));
  }
  DayClass start = DayClass::monday;
  if (j.contains("start")) {
    auto cls = day_class_from_string(j.at("start").get<std::string>());
    if (!cls || *cls == DayClass::holiday) {
      throw Error(ErrorCategory::validation,
                  "calendar start must be a day-of-week name");
    }
    start = *cls;
  }
  std::vector<int> holidays;
  if (j.contains("holidays")) {
    holidays = j.at("holidays").get<std::vector<int>>();
  }
  return Calendar::cyclic(start, std::move(holidays));
}

namespace {

json pieces_to_json(const std::vector<HazardPiece>& pieces, const char* value_key) {
  json arr = json::array();
  for (const auto& p : pieces) {
    arr.push_back({{"start", p.start}, {value_key, p.value}});
  }
  return arr;
}

std::vector<HazardPiece> pieces_from_json(const json& arr, const char* value_key) {
  std::vector<HazardPiece> out;
  for (const auto& item : arr) {
    HazardPiece p;
    p.start = item.at("start").get<double>();
    p.value = item.at(value_key).get<double>();
    out.push_back(p);
  }
  return out;
}

}  // namespace

json scenario_to_json(const ScenarioConfig& s) {
  json j;
  j["population_size"] = s.population_size;
  j["true_pi"] = s.true_pi;
  j["censor_time"] = s.censor_time;
  j["item_response_rate"] = s.item_response_rate;
  j["baseline_hazard"] = pieces_to_json(s.hazard.baseline, "rate");
  j["hazard_ratio"] = pieces_to_json(s.hazard.ratio, "value");
  return j;
}

ScenarioConfig scenario_from_json(const json& j, const Calendar& calendar,
                                  std::uint64_t seed) {
  ScenarioConfig s;
  s.population_size = j.at("population_size").get<std::int64_t>();
  s.true_pi = j.at("true_pi").get<double>();
  s.censor_time = j.at("censor_time").get<double>();
  s.item_response_rate = j.value("item_response_rate", 1.0);
  s.hazard.baseline = pieces_from_json(j.at("baseline_hazard"), "rate");
  s.hazard.ratio = pieces_from_json(j.at("hazard_ratio"), "value");
  s.rng_seed = seed;
  s.calendar = calendar;
  return s;
}

json fit_config_to_json(const FitConfig& f) {
  json j;
  j["pi_init"] = f.pi_init.has_value() ? json(*f.pi_init) : json("auto");
  j["rho_init"] = f.rho_init.has_value() ? json(*f.rho_init) : json("auto");
  j["max_iterations"] = f.max_iterations;
  j["gradient_tolerance"] = f.gradient_tolerance;
  j["step_shrink"] = f.step_shrink;
  j["tie_seed"] = f.tie_seed;
  return j;
}

FitConfig fit_config_from_json(const json& j) {
  FitConfig f;
  if (j.is_null()) return f;
  if (j.contains("pi_init") && j.at("pi_init").is_number()) {
    f.pi_init = j.at("pi_init").get<double>();
  }
  if (j.contains("rho_init") && j.at("rho_init").is_number()) {
    f.rho_init = j.at("rho_init").get<double>();
  }
  f.max_iterations = j.value("max_iterations", f.max_iterations);
  f.gradient_tolerance = j.value("gradient_tolerance", f.gradient_tolerance);
  f.step_shrink = j.value("step_shrink", f.step_shrink);
  f.tie_seed = j.value("tie_seed", f.tie_seed);
  return f;
}

json fit_result_to_json(const FitResult& r) {
  json j;
  j["pi_hat"] = r.pi_hat;
  j["pi_se"] = r.pi_se;
  j["rho_hat"] = r.rho_hat;
  j["rho_se"] = r.rho_se;
  j["loglik_at_max"] = r.loglik_at_max;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["status"] = to_string(r.status);
  j["gradient_norm_at_exit"] = r.gradient_norm_at_exit;
  j["tie_seed"] = r.tie_seed;
  j["pi_feasible_range"] = {r.pi_lower_bound, r.pi_upper_bound};
  j["hessian_condition"] = r.hessian_condition;
  if (r.weak_identification_warning.has_value()) {
    j["weak_identification_warning"] = *r.weak_identification_warning;
  }
  return j;
}

json estimate_to_json(const Estimate& e) {
  return json{{"estimate", e.value}, {"se", e.se}};
}

json daily_rows_to_json(const std::vector<DailyRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["day"] = r.day;
    j["day_class"] = to_string(r.day_class);
    j["count1"] = r.count1;
    j["count0"] = r.count0;
    j["proportion"] = r.proportion.has_value() ? json(*r.proportion) : json();
    j["se"] = r.se;
    arr.push_back(std::move(j));
  }
  return arr;
}

json ratio_rows_to_json(const std::vector<HazardRatioRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["day"] = r.day;
    j["day_class"] = to_string(r.day_class);
    j["count1"] = r.count1;
    j["count0"] = r.count0;
    j["n0_hat"] = r.n0_hat;
    j["n1_hat"] = r.n1_hat;
    j["ratio"] = r.ratio.has_value() ? json(*r.ratio) : json();
    j["log_se"] = r.log_se;
    arr.push_back(std::move(j));
  }
  return arr;
}

json trend_to_json(const TrendTest& t) {
  json j;
  j["slope"] = t.slope;
  j["slope_se"] = t.slope_se;
  j["z"] = t.z;
  j["p_value"] = t.p_value;
  j["n_days"] = t.n_days;
  return j;
}

json evaluation_to_json(const LikelihoodEvaluation& ev) {
  json j;
  j["loglik"] = ev.loglik;
  j["feasible"] = ev.feasible;
  j["score"] = ev.score;
  j["h_pipi"] = ev.h_pipi;
  j["h_pirho"] = ev.h_pirho;
  j["h_rhorho"] = ev.h_rhorho;
  if (ev.per_event_terms.has_value()) j["per_event_terms"] = *ev.per_event_terms;
  return j;
}

json config_echo(const RunConfig& cfg) {
  json j;
  j["schema_version"] = 1;
  j["command"] = cfg.command;
  if (!cfg.input_path.empty()) j["input"] = cfg.input_path;
  if (!cfg.out_path.empty()) j["out"] = cfg.out_path;
  if (!cfg.series_out.empty()) j["series_out"] = cfg.series_out;
  if (!cfg.dataset_out.empty()) j["dataset_out"] = cfg.dataset_out;
  if (!cfg.strata_path.empty()) j["strata"] = cfg.strata_path;
  j["population_size"] = cfg.population_size;
  j["censor_time"] = cfg.censor_time;
  j["calendar"] = calendar_to_json(cfg.calendar);
  if (cfg.partition.kind == PartitionKind::breakpoints) {
    // Object form: the shorthand string would truncate fractional breakpoints.
    j["partition"] = {{"kind", "breakpoints"}, {"at", cfg.partition.breakpoints}};
  } else {
    j["partition"] = to_string(cfg.partition);
  }
  j["fit"] = fit_config_to_json(cfg.fit);
  if (cfg.assumed_pi.has_value()) j["assumed_pi"] = *cfg.assumed_pi;
  j["include_weekends"] = cfg.include_weekends;
  if (cfg.horizon_days.has_value()) j["horizon_days"] = *cfg.horizon_days;
  if (cfg.scenario.has_value()) j["scenario"] = scenario_to_json(*cfg.scenario);
  j["replicates"] = cfg.replicates;
  j["threads"] = cfg.threads;
  j["seed"] = cfg.seed;
  j["debug_likelihood"] = cfg.debug_likelihood;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  cfg.command = j.value("command", "");
  cfg.input_path = j.value("input", "");
  cfg.out_path = j.value("out", "");
  cfg.series_out = j.value("series_out", "");
  cfg.dataset_out = j.value("dataset_out", "");
  cfg.strata_path = j.value("strata", "");
  cfg.population_size = j.value("population_size", std::int64_t{0});
  cfg.censor_time = j.value("censor_time", 0.0);
  cfg.calendar = calendar_from_json(j.contains("calendar") ? j.at("calendar") : json());
  if (j.contains("partition")) {
    const auto& p = j.at("partition");
    if (p.is_string()) {
      cfg.partition = parse_partition_shorthand(p.get<std::string>());
    } else {
      const std::string kind = p.at("kind").get<std::string>();
      if (kind == "constant") {
        cfg.partition = PartitionSpec::constant();
      } else if (kind == "weekday-classes") {
        cfg.partition = PartitionSpec::weekday_classes();
      } else if (kind == "every-k-weekdays") {
        cfg.partition = PartitionSpec::every_k_weekdays(p.at("k").get<int>());
      } else if (kind == "breakpoints") {
        cfg.partition =
            PartitionSpec::with_breakpoints(p.at("at").get<std::vector<double>>());
      } else {
        throw Error(ErrorCategory::validation, "unknown partition kind '" + kind + "'");
      }
    }
  }
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.fit = fit_config_from_json(j.contains("fit") ? j.at("fit") : json());
  if (!(j.contains("fit") && j.at("fit").contains("tie_seed"))) {
    cfg.fit.tie_seed = cfg.seed;  // tie-breaking follows the global seed by default
  }
  if (j.contains("assumed_pi")) cfg.assumed_pi = j.at("assumed_pi").get<double>();
  cfg.include_weekends = j.value("include_weekends", false);
  if (j.contains("horizon_days")) cfg.horizon_days = j.at("horizon_days").get<double>();
  cfg.replicates = j.value("replicates", cfg.replicates);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.debug_likelihood = j.value("debug_likelihood", false);
  if (j.contains("scenario")) {
    cfg.scenario = scenario_from_json(j.at("scenario"), cfg.calendar, cfg.seed);
  }
  return cfg;
}

}  // namespace rtprop::detail
