#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtprop/domain.hpp"

namespace rtprop {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

struct StratumCounts {
  std::string name;
  double population_share = 0.0;  // shares sum to 1 across strata
  std::int64_t count1 = 0;        // labeled respondents in the group of interest
  std::int64_t count0 = 0;
};

struct StratumTable {
  std::vector<StratumCounts> strata;
};

/// One calendar day of the daily-proportion diagnostic (Figure-2 style).
/// Empty days keep their row with zero counts and no proportion.
struct DailyRow {
  int day = 0;
  DayClass day_class = DayClass::monday;
  std::int64_t count1 = 0;
  std::int64_t count0 = 0;
  std::optional<double> proportion;
  double se = 0.0;
};

/// One day of the hazard-ratio-given-pi diagnostic (Figure-3 style).
/// n0_hat/n1_hat are the estimated risk sets at the start of the day under
/// the assumed pi; the ratio is absent on days where either group has no
/// labeled events.
struct HazardRatioRow {
  int day = 0;
  DayClass day_class = DayClass::monday;
  std::int64_t count1 = 0;
  std::int64_t count0 = 0;
  double n0_hat = 0.0;
  double n1_hat = 0.0;
  std::optional<double> ratio;
  double log_se = 0.0;
};

struct DiagnosticsSeries {
  std::vector<DailyRow> daily;
  std::vector<HazardRatioRow> hazard_ratio;
};

/// Labeled sample mean with the usual binomial standard error.
Estimate sample_proportion(const SurveyDataset& d);

/// Share-weighted within-stratum proportions; the SE propagates
/// within-stratum binomial variance. A stratum with positive share and no
/// labeled respondents is a hard error.
Estimate poststratify(const StratumTable& t);

std::vector<DailyRow> daily_proportion_series(const SurveyDataset& d);

/// Daily response-rate ratio (d1/n1_hat)/(d0/n0_hat) under an assumed pi.
/// Weekends and holidays are excluded unless include_weekends_holidays.
/// SE of the log ratio: sqrt(1/d1 + 1/d0 - 1/n1_hat - 1/n0_hat), a
/// log-rate-ratio variance with finite-population corrections (the source
/// figures leave the band construction unspecified; this choice is
/// isolated here so alternates can be swapped).
std::vector<HazardRatioRow> hazard_ratio_series(const SurveyDataset& d,
                                                double assumed_pi,
                                                bool include_weekends_holidays = false);

/// Weighted least-squares trend of log(ratio) on day, weights 1/log_se^2.
struct TrendTest {
  double slope = 0.0;
  double slope_se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  std::size_t n_days = 0;
};
TrendTest log_ratio_trend(const std::vector<HazardRatioRow>& rows);

/// Back-of-the-envelope estimate: fit a count-weighted least-squares line
/// to the weekday daily proportions, continue arrivals at a constant rate
/// out to horizon_days, and return the arrival-weighted mean of the line
/// over [0, horizon_days] (= the line's value at horizon_days / 2).
double extrapolate_trend(const std::vector<DailyRow>& rows, double horizon_days);

/// Days until cumulative response reaches the whole population at the
/// observed average arrival rate: tau * N / n.
double default_extrapolation_horizon(const SurveyDataset& d);

}  // namespace rtprop
