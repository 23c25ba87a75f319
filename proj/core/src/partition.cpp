#include "rtprop/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "rtprop/error.hpp"

namespace rtprop {

PartitionSpec PartitionSpec::constant() { return {PartitionKind::constant, 0, {}}; }

PartitionSpec PartitionSpec::weekday_classes() {
  return {PartitionKind::weekday_classes, 0, {}};
}

PartitionSpec PartitionSpec::every_k_weekdays(int k) {
  return {PartitionKind::every_k_weekdays, k, {}};
}

PartitionSpec PartitionSpec::with_breakpoints(std::vector<double> at) {
  return {PartitionKind::breakpoints, 0, std::move(at)};
}

PartitionSpec parse_partition_shorthand(const std::string& text) {
  if (text == "constant") return PartitionSpec::constant();
  if (text == "weekday-classes") return PartitionSpec::weekday_classes();
  if (text.starts_with("every-") && text.ends_with("-weekdays")) {
    const std::string num = text.substr(6, text.size() - 6 - 9);
    int k = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), k);
    if (ec == std::errc() && p == num.data() + num.size() && k >= 1) {
      return PartitionSpec::every_k_weekdays(k);
    }
  }
  if (text.starts_with("breakpoints:")) {
    std::vector<double> at;
    std::size_t pos = std::string("breakpoints:").size();
    while (pos < text.size()) {
      std::size_t comma = text.find(',', pos);
      if (comma == std::string::npos) comma = text.size();
      const std::string tok = text.substr(pos, comma - pos);
      try {
        at.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw Error(ErrorCategory::validation,
                    "bad breakpoint value '" + tok + "' in partition shorthand");
      }
      pos = comma + 1;
    }
    if (at.empty()) {
      throw Error(ErrorCategory::validation, "breakpoints shorthand lists no values");
    }
    return PartitionSpec::with_breakpoints(std::move(at));
  }
  throw Error(ErrorCategory::validation, "unrecognized partition shorthand '" + text +
                                             "' (expected constant, weekday-classes, "
                                             "every-<k>-weekdays, or breakpoints:a,b)");
}

std::string to_string(const PartitionSpec& spec) {
  switch (spec.kind) {
    case PartitionKind::constant: return "constant";
    case PartitionKind::weekday_classes: return "weekday-classes";
    case PartitionKind::every_k_weekdays:
      return "every-" + std::to_string(spec.k) + "-weekdays";
    case PartitionKind::breakpoints: {
      std::string s = "breakpoints:";
      for (std::size_t i = 0; i < spec.breakpoints.size(); ++i) {
        if (i > 0) s += ",";
        s += std::to_string(spec.breakpoints[i]);
      }
      return s;
    }
  }
  return "unknown";
}

namespace {

// Compresses a per-day stratum assignment into boundary/stratum segments.
HazardPartition from_day_map(const std::vector<int>& day_stratum, double censor_time,
                             int num_strata) {
  HazardPartition p;
  p.num_strata = num_strata;
  p.boundaries.push_back(0.0);
  for (std::size_t day = 0; day < day_stratum.size(); ++day) {
    if (day + 1 < day_stratum.size() && day_stratum[day + 1] == day_stratum[day]) {
      continue;
    }
    double end = std::min(static_cast<double>(day + 1), censor_time);
    p.stratum.push_back(day_stratum[day]);
    p.boundaries.push_back(end);
  }
  return p;
}

void require_all_nonempty(const HazardPartition& p) {
  std::vector<char> seen(static_cast<std::size_t>(p.num_strata), 0);
  for (int s : p.stratum) seen[static_cast<std::size_t>(s)] = 1;
  for (int k = 0; k < p.num_strata; ++k) {
    if (!seen[static_cast<std::size_t>(k)]) {
      throw Error(ErrorCategory::validation,
                  "partition stratum " + std::to_string(k) +
                      " is empty after resolution");
    }
  }
}

}  // namespace

HazardPartition resolve_partition(const PartitionSpec& spec, TimePoint censor_time,
                                  const Calendar& calendar) {
  if (!(censor_time > 0.0) || !std::isfinite(censor_time)) {
    throw Error(ErrorCategory::validation, "censor_time must be positive and finite");
  }

  if (spec.kind == PartitionKind::constant) {
    return make_constant_partition(censor_time);
  }

  if (spec.kind == PartitionKind::breakpoints) {
    std::vector<double> at = spec.breakpoints;
    std::sort(at.begin(), at.end());
    HazardPartition p;
    p.boundaries.push_back(0.0);
    for (double b : at) {
      if (!(b > p.boundaries.back()) || !(b < censor_time)) {
        throw Error(ErrorCategory::validation,
                    "breakpoint " + std::to_string(b) +
                        " yields an empty interval in [0, " +
                        std::to_string(censor_time) + ")");
      }
      p.boundaries.push_back(b);
    }
    p.boundaries.push_back(censor_time);
    p.num_strata = static_cast<int>(p.boundaries.size()) - 1;
    for (int k = 0; k < p.num_strata; ++k) p.stratum.push_back(k);
    return p;
  }

  const int days = static_cast<int>(std::ceil(censor_time));
  std::vector<int> day_stratum(static_cast<std::size_t>(days), 0);

  if (spec.kind == PartitionKind::weekday_classes) {
    // Mon..Fri -> 0..4, weekend/holiday -> 5.
    for (int day = 0; day < days; ++day) {
      DayClass c = calendar.day_class(day);
      day_stratum[static_cast<std::size_t>(day)] =
          is_weekend_or_holiday(c) ? 5 : static_cast<int>(c);
    }
    auto p = from_day_map(day_stratum, censor_time, 6);
    require_all_nonempty(p);
    return p;
  }

  // every_k_weekdays: consecutive weekdays form blocks of k; all weekend and
  // holiday days share the final stratum.
  if (spec.k < 1) {
    throw Error(ErrorCategory::validation, "every-k-weekdays requires k >= 1");
  }
  int weekday_counter = 0;
  std::vector<char> is_special(static_cast<std::size_t>(days), 0);
  for (int day = 0; day < days; ++day) {
    DayClass c = calendar.day_class(day);
    if (is_weekend_or_holiday(c)) {
      is_special[static_cast<std::size_t>(day)] = 1;
    } else {
      day_stratum[static_cast<std::size_t>(day)] = weekday_counter / spec.k;
      ++weekday_counter;
    }
  }
  if (weekday_counter == 0) {
    throw Error(ErrorCategory::validation,
                "every-k-weekdays partition has no weekday days in [0, tau)");
  }
  const int blocks = (weekday_counter + spec.k - 1) / spec.k;
  bool any_special = false;
  for (int day = 0; day < days; ++day) {
    if (is_special[static_cast<std::size_t>(day)]) {
      day_stratum[static_cast<std::size_t>(day)] = blocks;
      any_special = true;
    }
  }
  if (!any_special) {
    throw Error(ErrorCategory::validation,
                "every-k-weekdays weekend/holiday stratum is empty in [0, tau)");
  }
  auto p = from_day_map(day_stratum, censor_time, blocks + 1);
  require_all_nonempty(p);
  return p;
}

}  // namespace rtprop
