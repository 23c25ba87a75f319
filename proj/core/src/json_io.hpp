#pragma once

#include <json.hpp>

#include "rtprop/comparators.hpp"
#include "rtprop/fit.hpp"
#include "rtprop/likelihood.hpp"
#include "rtprop/run.hpp"
#include "rtprop/simulator.hpp"

namespace rtprop::detail {

nlohmann::json calendar_to_json(const Calendar& cal);
Calendar calendar_from_json(const nlohmann::json& j);

nlohmann::json scenario_to_json(const ScenarioConfig& s);
ScenarioConfig scenario_from_json(const nlohmann::json& j, const Calendar& calendar,
                                  std::uint64_t seed);

nlohmann::json fit_config_to_json(const FitConfig& f);
FitConfig fit_config_from_json(const nlohmann::json& j);

nlohmann::json fit_result_to_json(const FitResult& r);
nlohmann::json estimate_to_json(const Estimate& e);
nlohmann::json daily_rows_to_json(const std::vector<DailyRow>& rows);
nlohmann::json ratio_rows_to_json(const std::vector<HazardRatioRow>& rows);
nlohmann::json trend_to_json(const TrendTest& t);
nlohmann::json evaluation_to_json(const LikelihoodEvaluation& ev);

/// The echo is itself a valid config: feeding it back through
/// load_run_config reproduces the job exactly.
nlohmann::json config_echo(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

}  // namespace rtprop::detail
