#pragma once

// Shared test scenarios: the survey-scale calibration used across suites
// and the poststratification stress table.

#include "rtprop/simulator.hpp"

namespace scenarios {

// Six-week window opening on a Tuesday with two Monday holidays; constant
// baseline tuned for roughly 31% unit response at tau = 42 when the group
// of interest (pi = 0.2) responds at twice the baseline rate.
inline rtprop::ScenarioConfig survey_scale(std::int64_t population,
                                           std::uint64_t seed) {
  rtprop::ScenarioConfig cfg;
  cfg.population_size = population;
  cfg.true_pi = 0.2;
  cfg.hazard = rtprop::HazardSpec::constant(0.00736, 2.0);
  cfg.censor_time = 42.0;
  cfg.item_response_rate = 0.95;
  cfg.rng_seed = seed;
  cfg.calendar = rtprop::Calendar::cyclic(rtprop::DayClass::tuesday, {20, 34});
  return cfg;
}

// Half the population carries the label of interest, but respondents pile
// up in one stratum: sample proportion 47%, poststratified 35%, truth 50%.
inline rtprop::ColliderSpec collider_table() {
  rtprop::ColliderSpec spec;
  spec.population_size = 10000;
  spec.respondent_count = 2200;  // roughly a quarter participate
  spec.cells = {
      {"supervisor", 0, 0.40, 0.45},
      {"supervisor", 1, 0.10, 0.45},
      {"non-supervisor", 0, 0.10, 0.08},
      {"non-supervisor", 1, 0.40, 0.02},
  };
  return spec;
}

}  // namespace scenarios
