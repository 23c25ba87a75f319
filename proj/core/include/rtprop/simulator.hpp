#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rtprop/comparators.hpp"
#include "rtprop/domain.hpp"

namespace rtprop {

/// Positivity bounds on hazard rates: every rate must lie within
/// [kHazardRateEpsilon, 1/kHazardRateEpsilon].
inline constexpr double kHazardRateEpsilon = 1e-6;

struct HazardPiece {
  double start = 0.0;  // piece covers [start, next start); the last extends to +inf
  double value = 0.0;  // rate (baseline) or ratio (rho)
};

/// Group-specific hazards: lambda_0(t) is the piecewise-constant baseline and
/// lambda_1(t) = rho(t) * lambda_0(t).
struct HazardSpec {
  std::vector<HazardPiece> baseline;  // lambda_0 pieces, starts ascending from 0
  std::vector<HazardPiece> ratio;     // rho pieces, starts ascending from 0

  static HazardSpec constant(double lambda0, double rho);

  double baseline_rate(double t) const;
  double hazard_ratio(double t) const;
  double rate(int group, double t) const;
  /// Integrated hazard of `group` over [0, t].
  double cumulative_hazard(int group, double t) const;

  std::vector<ValidationFinding> validate() const;
};

struct ScenarioConfig {
  std::int64_t population_size = 0;
  double true_pi = 0.0;
  HazardSpec hazard;
  double censor_time = 0.0;
  double item_response_rate = 1.0;  // P(delta = 1 | responded), independent of (T, X)
  std::uint64_t rng_seed = 0;
  Calendar calendar;
};

/// Inverse-transform draw from the piecewise-exponential response-time
/// distribution of `group`. May exceed any censor time; the caller censors.
TimePoint sample_response_time(const HazardSpec& h, int group, std::mt19937_64& rng);

struct SimulatedSurvey {
  SurveyDataset dataset;
  double true_pi = 0.0;                  // exact finite-population proportion
  std::int64_t n_group1 = 0;
  std::vector<std::uint8_t> all_labels;  // per individual, whole population
  std::int64_t n_responded = 0;          // unit responders (time < tau)
};

/// Samples the whole population. Group sizes are deterministic
/// floor(N*pi) plus one Bernoulli draw for the fractional remainder, so the
/// finite-population proportion is exact for testing. Response times are
/// drawn before item-response flags from separate seed streams: changing
/// item_response_rate or censor_time never changes the times.
SimulatedSurvey simulate_survey(const ScenarioConfig& cfg);

// ---- Finite collider population (poststratification stress case) ----

struct ColliderCell {
  std::string stratum;
  int label = 0;                  // 1 = group of interest
  double population_share = 0.0;  // shares sum to 1 per column
  double respondent_share = 0.0;
};

struct ColliderSpec {
  std::vector<ColliderCell> cells;
  std::int64_t population_size = 10000;
  std::int64_t respondent_count = 2200;
};

struct ColliderPopulationCell {
  std::string stratum;
  int label = 0;
  std::int64_t population = 0;
  std::int64_t respondents = 0;
};

struct ColliderPopulation {
  std::vector<ColliderPopulationCell> cells;
  std::int64_t population_size = 0;
  std::int64_t respondent_count = 0;

  double true_proportion() const;
  /// Respondent label-1 / label-0 totals.
  std::pair<std::int64_t, std::int64_t> respondent_label_counts() const;
  StratumTable stratum_table() const;
};

/// Materializes integer cell counts from the share table. Throws a
/// validation Error when shares do not sum to one, counts do not round to
/// the requested totals, or a cell has more respondents than members.
ColliderPopulation simulate_collider_population(const ColliderSpec& spec);

}  // namespace rtprop
