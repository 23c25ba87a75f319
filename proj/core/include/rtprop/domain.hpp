#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rtprop {

/// Time is measured in days since the survey opened; fractional days are
/// allowed. Integer day d covers the half-open interval [d, d+1).
using TimePoint = double;

enum class DayClass : std::uint8_t {
  monday = 0,
  tuesday,
  wednesday,
  thursday,
  friday,
  saturday,
  sunday,
  holiday
};

bool is_weekend_or_holiday(DayClass c);
const char* to_string(DayClass c);
std::optional<DayClass> day_class_from_string(std::string_view s);

/// Maps integer day indices to day classes. The default is a weekly cycle
/// starting on Monday at day 0; a holiday set and explicit per-day tags
/// override the cycle. The kernel never touches real dates or timezones;
/// callers convert timestamps to day offsets before data enters here.
class Calendar {
 public:
  Calendar() = default;

  /// Weekly cycle with `start` as the class of day 0 (must be a weekday
  /// name, not `holiday`), plus an optional holiday list.
  static Calendar cyclic(DayClass start, std::vector<int> holidays = {});

  /// Fully explicit day -> class map; days outside the map fall back to
  /// the Monday-start cycle.
  static Calendar from_map(std::map<int, DayClass> tags);

  DayClass day_class(int day) const;
  bool is_holiday(int day) const { return holidays_.count(day) > 0; }

  int start_offset() const { return start_offset_; }
  const std::set<int>& holidays() const { return holidays_; }
  const std::map<int, DayClass>& explicit_tags() const { return explicit_tags_; }

 private:
  int start_offset_ = 0;  // day-of-week index of day 0, 0 = Monday
  std::set<int> holidays_;
  std::map<int, DayClass> explicit_tags_;
};

/// One responding individual. Unit nonrespondents are never materialized;
/// they are implied by population_size - records.size().
struct ResponseRecord {
  TimePoint time = 0.0;
  std::optional<int> label;  // 1 = group of interest, 0 = reference group
  bool observed = false;     // delta: 1 when the label was recorded
};

struct SurveyDataset {
  std::vector<ResponseRecord> records;  // sorted by time after break_ties
  std::int64_t population_size = 0;     // N
  TimePoint censor_time = 0.0;          // tau, survey close
  Calendar calendar;
};

struct ValidationFinding {
  std::string invariant;        // short name of the violated invariant
  std::ptrdiff_t record_index;  // offending record, -1 for dataset-level
  std::string detail;
};

std::string to_string(const ValidationFinding& f);

/// Checks every dataset and record invariant. Findings are data, not
/// failures: an empty result means the dataset is well formed.
std::vector<ValidationFinding> validate_dataset(const SurveyDataset& d);

/// Resolves tied event times by seeded random jitter. Tied records are
/// randomly ordered within the tie and offset by strictly less than both
/// the gap to the next distinct time and the end of the source day, so
/// day and interval assignment never changes. Idempotent on its output;
/// a dataset without ties is returned unchanged (sorted).
SurveyDataset break_ties(const SurveyDataset& d, std::uint64_t seed);

/// Piecewise-constant stratum assignment over [0, censor_time). Segment i
/// covers [boundaries[i], boundaries[i+1]) and maps to stratum[i]; several
/// segments may share a stratum (calendar-based partitions pool
/// non-contiguous days).
struct HazardPartition {
  std::vector<double> boundaries;  // ascending, front() == 0, back() == tau
  std::vector<int> stratum;        // size boundaries.size()-1, values in [0, num_strata)
  int num_strata = 0;

  /// Stratum index of time t, or -1 when t lies outside [0, tau).
  int index_of(TimePoint t) const;
};

HazardPartition make_constant_partition(TimePoint censor_time);

/// Every stratum must contain at least one labeled event, otherwise its
/// hazard ratio is unidentified.
std::vector<ValidationFinding> validate_partition(const HazardPartition& p,
                                                  const SurveyDataset& d);

struct ModelParams {
  double pi = 0.5;          // population proportion of the group of interest
  std::vector<double> rho;  // hazard ratio per stratum, all > 0
};

}  // namespace rtprop
