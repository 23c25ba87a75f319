#include "rtprop/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rtprop/error.hpp"
#include "rng_util.hpp"

namespace rtprop {

const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::infeasible: return "infeasible";
    case ErrorCategory::not_converged: return "not_converged";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::validation: return 2;
    case ErrorCategory::infeasible: return 3;
    case ErrorCategory::not_converged: return 4;
    case ErrorCategory::io: return 5;
  }
  return 1;
}

bool is_weekend_or_holiday(DayClass c) {
  return c == DayClass::saturday || c == DayClass::sunday || c == DayClass::holiday;
}

const char* to_string(DayClass c) {
  switch (c) {
    case DayClass::monday: return "monday";
    case DayClass::tuesday: return "tuesday";
    case DayClass::wednesday: return "wednesday";
    case DayClass::thursday: return "thursday";
    case DayClass::friday: return "friday";
    case DayClass::saturday: return "saturday";
    case DayClass::sunday: return "sunday";
    case DayClass::holiday: return "holiday";
  }
  return "unknown";
}

std::optional<DayClass> day_class_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(DayClass::holiday); ++i) {
    auto c = static_cast<DayClass>(i);
    if (s == to_string(c)) return c;
  }
  if (s == "weekend") return DayClass::saturday;
  return std::nullopt;
}

Calendar Calendar::cyclic(DayClass start, std::vector<int> holidays) {
  if (start == DayClass::holiday) {
    throw Error(ErrorCategory::validation,
                "calendar start day must be a weekday name, not 'holiday'");
  }
  Calendar cal;
  cal.start_offset_ = static_cast<int>(start);
  cal.holidays_.insert(holidays.begin(), holidays.end());
  return cal;
}

Calendar Calendar::from_map(std::map<int, DayClass> tags) {
  Calendar cal;
  cal.explicit_tags_ = std::move(tags);
  return cal;
}

DayClass Calendar::day_class(int day) const {
  if (auto it = explicit_tags_.find(day); it != explicit_tags_.end()) {
    return it->second;
  }
  if (holidays_.count(day) > 0) return DayClass::holiday;
  int dow = (start_offset_ + (day % 7) + 7) % 7;
  return static_cast<DayClass>(dow);
}

std::string to_string(const ValidationFinding& f) {
  std::string s = f.invariant;
  if (f.record_index >= 0) {
    s += " (record " + std::to_string(f.record_index) + ")";
  }
  if (!f.detail.empty()) {
    s += ": " + f.detail;
  }
  return s;
}

std::vector<ValidationFinding> validate_dataset(const SurveyDataset& d) {
  std::vector<ValidationFinding> out;
  auto add = [&](std::string invariant, std::ptrdiff_t idx, std::string detail = "") {
    out.push_back({std::move(invariant), idx, std::move(detail)});
  };

  if (d.population_size < 1) {
    add("population_size must be positive", -1,
        "N = " + std::to_string(d.population_size));
  }
  if (!(d.censor_time > 0.0) || !std::isfinite(d.censor_time)) {
    add("censor_time must be positive and finite", -1);
  }
  if (d.population_size >= 1 &&
      static_cast<std::int64_t>(d.records.size()) > d.population_size) {
    add("more records than population_size", -1,
        std::to_string(d.records.size()) + " records, N = " +
            std::to_string(d.population_size));
  }

  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    const auto idx = static_cast<std::ptrdiff_t>(i);
    if (!std::isfinite(r.time) || r.time <= 0.0) {
      add("time not in (0, censor_time)", idx, "time = " + std::to_string(r.time));
    } else if (r.time >= d.censor_time) {
      add("time >= censor_time", idx, "time = " + std::to_string(r.time));
    }
    if (r.observed && !r.label.has_value()) {
      add("labeled flag without label", idx);
    }
    if (!r.observed && r.label.has_value()) {
      add("label present without observed flag", idx);
    }
    if (r.label.has_value() && *r.label != 0 && *r.label != 1) {
      add("label must be 0 or 1", idx, "label = " + std::to_string(*r.label));
    }
    if (i > 0) {
      if (r.time < d.records[i - 1].time) {
        add("records not sorted by time", idx);
      } else if (r.time == d.records[i - 1].time) {
        add("tied times", idx, "time = " + std::to_string(r.time));
      }
    }
  }
  return out;
}

SurveyDataset break_ties(const SurveyDataset& d, std::uint64_t seed) {
  SurveyDataset out = d;
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const ResponseRecord& a, const ResponseRecord& b) {
                     return a.time < b.time;
                   });

  bool any_tie = false;
  for (std::size_t i = 1; i < out.records.size(); ++i) {
    if (out.records[i].time == out.records[i - 1].time) {
      any_tie = true;
      break;
    }
  }
  if (!any_tie) return out;

  std::mt19937_64 rng(seed);
  std::size_t i = 0;
  const std::size_t n = out.records.size();
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && out.records[j].time == out.records[i].time) ++j;
    const std::size_t m = j - i;
    if (m > 1) {
      const double t = out.records[i].time;
      double next = (j < n) ? out.records[j].time : d.censor_time;
      double day_end = std::floor(t) + 1.0;
      double width = std::min(next - t, day_end - t);
      if (width > 0.0) {
        width *= 0.999;  // strict-inequality guard against rounding
        // Random permutation of ranks, one jittered slot per rank. Slot
        // offsets are strictly increasing in rank, so times stay distinct
        // even if two uniforms collide.
        std::vector<std::size_t> rank(m);
        for (std::size_t r = 0; r < m; ++r) rank[r] = r;
        for (std::size_t r = m - 1; r > 0; --r) {
          std::size_t s = static_cast<std::size_t>(rng() % (r + 1));
          std::swap(rank[r], rank[s]);
        }
        for (std::size_t r = 0; r < m; ++r) {
          double u = detail::uniform01(rng);
          out.records[i + r].time =
              t + width * (static_cast<double>(rank[r]) + u) /
                      static_cast<double>(m + 1);
        }
      }
    }
    i = j;
  }

  std::sort(out.records.begin(), out.records.end(),
            [](const ResponseRecord& a, const ResponseRecord& b) {
              return a.time < b.time;
            });
  return out;
}

int HazardPartition::index_of(TimePoint t) const {
  if (boundaries.size() < 2 || t < boundaries.front() || t >= boundaries.back()) {
    return -1;
  }
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
  auto seg = static_cast<std::size_t>(it - boundaries.begin()) - 1;
  if (seg >= stratum.size()) return -1;
  return stratum[seg];
}

HazardPartition make_constant_partition(TimePoint censor_time) {
  HazardPartition p;
  p.boundaries = {0.0, censor_time};
  p.stratum = {0};
  p.num_strata = 1;
  return p;
}

std::vector<ValidationFinding> validate_partition(const HazardPartition& p,
                                                  const SurveyDataset& d) {
  std::vector<ValidationFinding> out;
  if (p.num_strata < 1 || p.boundaries.size() < 2 ||
      p.stratum.size() + 1 != p.boundaries.size()) {
    out.push_back({"malformed partition", -1, ""});
    return out;
  }
  if (p.boundaries.front() != 0.0 || p.boundaries.back() < d.censor_time) {
    out.push_back({"partition does not cover [0, censor_time)", -1, ""});
  }
  std::vector<std::int64_t> labeled_per_stratum(p.num_strata, 0);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    int k = p.index_of(r.time);
    if (k < 0) {
      out.push_back({"event time outside partition", static_cast<std::ptrdiff_t>(i),
                     "time = " + std::to_string(r.time)});
      continue;
    }
    if (r.observed && r.label.has_value()) ++labeled_per_stratum[k];
  }
  for (int k = 0; k < p.num_strata; ++k) {
    if (labeled_per_stratum[k] == 0) {
      out.push_back({"stratum without labeled events", -1,
                     "stratum " + std::to_string(k)});
    }
  }
  return out;
}

}  // namespace rtprop
