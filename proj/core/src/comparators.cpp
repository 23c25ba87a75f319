#include "rtprop/comparators.hpp"

#include <algorithm>
#include <cmath>

#include "rtprop/error.hpp"

namespace rtprop {

Estimate sample_proportion(const SurveyDataset& d) {
  std::int64_t n1 = 0;
  std::int64_t n = 0;
  for (const auto& r : d.records) {
    if (!r.observed || !r.label.has_value()) continue;
    ++n;
    if (*r.label == 1) ++n1;
  }
  if (n == 0) {
    throw Error(ErrorCategory::validation,
                "sample proportion requires at least one labeled record");
  }
  const double p = static_cast<double>(n1) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

Estimate poststratify(const StratumTable& t) {
  double est = 0.0;
  double var = 0.0;
  for (const auto& s : t.strata) {
    if (s.population_share <= 0.0) continue;
    const std::int64_t n = s.count0 + s.count1;
    if (n == 0) {
      throw Error(ErrorCategory::validation,
                  "stratum '" + s.name + "' has positive share but no labeled respondents");
    }
    const double p = static_cast<double>(s.count1) / static_cast<double>(n);
    est += s.population_share * p;
    var += s.population_share * s.population_share * p * (1.0 - p) /
           static_cast<double>(n);
  }
  return {est, std::sqrt(var)};
}

namespace {

struct DayBuckets {
  std::vector<std::int64_t> count0;
  std::vector<std::int64_t> count1;
  std::vector<std::int64_t> unlabeled;
};

DayBuckets bucket_by_day(const SurveyDataset& d, int days) {
  DayBuckets b;
  b.count0.assign(static_cast<std::size_t>(days), 0);
  b.count1.assign(static_cast<std::size_t>(days), 0);
  b.unlabeled.assign(static_cast<std::size_t>(days), 0);
  for (const auto& r : d.records) {
    const int day = static_cast<int>(std::floor(r.time));
    if (day < 0 || day >= days) continue;
    const auto i = static_cast<std::size_t>(day);
    if (r.observed && r.label.has_value()) {
      (*r.label == 1 ? b.count1[i] : b.count0[i]) += 1;
    } else {
      b.unlabeled[i] += 1;
    }
  }
  return b;
}

}  // namespace

std::vector<DailyRow> daily_proportion_series(const SurveyDataset& d) {
  const int days = static_cast<int>(std::ceil(d.censor_time));
  const auto b = bucket_by_day(d, days);
  std::vector<DailyRow> rows;
  rows.reserve(static_cast<std::size_t>(days));
  for (int day = 0; day < days; ++day) {
    const auto i = static_cast<std::size_t>(day);
    DailyRow row;
    row.day = day;
    row.day_class = d.calendar.day_class(day);
    row.count0 = b.count0[i];
    row.count1 = b.count1[i];
    const std::int64_t n = row.count0 + row.count1;
    if (n > 0) {
      const double p = static_cast<double>(row.count1) / static_cast<double>(n);
      row.proportion = p;
      row.se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<HazardRatioRow> hazard_ratio_series(const SurveyDataset& d,
                                                double assumed_pi,
                                                bool include_weekends_holidays) {
  if (!(assumed_pi > 0.0 && assumed_pi < 1.0)) {
    throw Error(ErrorCategory::infeasible, "assumed_pi must lie in (0, 1)");
  }
  const int days = static_cast<int>(std::ceil(d.censor_time));
  const auto b = bucket_by_day(d, days);
  const auto N = static_cast<double>(d.population_size);

  std::vector<HazardRatioRow> rows;
  double u = 0.0;  // unlabeled events before the day start
  double l0 = 0.0;
  double l1 = 0.0;
  for (int day = 0; day < days; ++day) {
    const auto i = static_cast<std::size_t>(day);
    HazardRatioRow row;
    row.day = day;
    row.day_class = d.calendar.day_class(day);
    row.count0 = b.count0[i];
    row.count1 = b.count1[i];
    row.n1_hat = (N - u) * assumed_pi - l1;
    row.n0_hat = (N - u) * (1.0 - assumed_pi) - l0;

    const double d1 = static_cast<double>(row.count1);
    const double d0 = static_cast<double>(row.count0);
    if (d1 > 0.0 && d0 > 0.0 && row.n1_hat > 0.0 && row.n0_hat > 0.0) {
      row.ratio = (d1 / row.n1_hat) / (d0 / row.n0_hat);
      const double v = 1.0 / d1 + 1.0 / d0 - 1.0 / row.n1_hat - 1.0 / row.n0_hat;
      row.log_se = std::sqrt(std::max(v, 0.0));
    }

    u += static_cast<double>(b.unlabeled[i]);
    l0 += d0;
    l1 += d1;

    if (!include_weekends_holidays && is_weekend_or_holiday(row.day_class)) continue;
    rows.push_back(row);
  }
  return rows;
}

TrendTest log_ratio_trend(const std::vector<HazardRatioRow>& rows) {
  // WLS of log(ratio) on day with weights 1 / log_se^2.
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (!r.ratio.has_value() || !(r.log_se > 0.0)) continue;
    const double w = 1.0 / (r.log_se * r.log_se);
    const double x = static_cast<double>(r.day);
    const double y = std::log(*r.ratio);
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
    ++n;
  }
  TrendTest t;
  t.n_days = n;
  if (n < 2) return t;
  const double sxx = swxx - swx * swx / sw;
  if (sxx <= 0.0) return t;
  t.slope = (swxy - swx * swy / sw) / sxx;
  t.slope_se = std::sqrt(1.0 / sxx);
  t.z = t.slope / t.slope_se;
  t.p_value = std::erfc(std::abs(t.z) / std::sqrt(2.0));
  return t;
}

double extrapolate_trend(const std::vector<DailyRow>& rows, double horizon_days) {
  if (!(horizon_days > 0.0)) {
    throw Error(ErrorCategory::validation, "extrapolation horizon must be positive");
  }
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  double first_day = 0.0, last_day = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (is_weekend_or_holiday(r.day_class)) continue;
    if (!r.proportion.has_value()) continue;
    const double w = static_cast<double>(r.count0 + r.count1);
    const double x = static_cast<double>(r.day);
    if (n == 0) first_day = x;
    last_day = x;
    sw += w;
    swx += w * x;
    swy += w * (*r.proportion);
    swxx += w * x * x;
    swxy += w * x * (*r.proportion);
    ++n;
  }
  if (n < 2 || last_day <= first_day) {
    throw Error(ErrorCategory::validation,
                "extrapolation needs at least two weekday observations");
  }
  const double sxx = swxx - swx * swx / sw;
  if (sxx <= 0.0) {
    throw Error(ErrorCategory::validation, "degenerate daily series: no day variance");
  }
  const double slope = (swxy - swx * swy / sw) / sxx;
  const double intercept = (swy - slope * swx) / sw;
  // Arrival-weighted mean of the fitted line over [0, horizon] with arrivals
  // continued at a constant rate: the line's value at the midpoint.
  return intercept + slope * horizon_days / 2.0;
}

double default_extrapolation_horizon(const SurveyDataset& d) {
  if (d.records.empty()) {
    throw Error(ErrorCategory::validation, "horizon needs at least one responder");
  }
  return d.censor_time * static_cast<double>(d.population_size) /
         static_cast<double>(d.records.size());
}

}  // namespace rtprop
