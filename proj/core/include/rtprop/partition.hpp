#pragma once

#include <string>
#include <vector>

#include "rtprop/domain.hpp"

namespace rtprop {

enum class PartitionKind {
  constant,          // one hazard ratio over all of [0, tau)
  weekday_classes,   // Mon..Fri each their own stratum, weekend/holiday pooled
  every_k_weekdays,  // blocks of k weekdays, weekend/holiday days pooled
  breakpoints        // explicit interior breakpoints, contiguous segments
};

struct PartitionSpec {
  PartitionKind kind = PartitionKind::constant;
  int k = 10;                      // every_k_weekdays only
  std::vector<double> breakpoints; // breakpoints only, strictly inside (0, tau)

  static PartitionSpec constant();
  static PartitionSpec weekday_classes();
  static PartitionSpec every_k_weekdays(int k);
  static PartitionSpec with_breakpoints(std::vector<double> at);
};

/// Parses the CLI shorthand: "constant", "weekday-classes",
/// "every-<k>-weekdays", or "breakpoints:a,b,c".
PartitionSpec parse_partition_shorthand(const std::string& text);

std::string to_string(const PartitionSpec& spec);

/// Materializes the stratum assignment over [0, censor_time). Calendar-based
/// kinds place segment boundaries on integer days; every_k_weekdays pools
/// all weekend and holiday days into one dedicated final stratum. Throws a
/// validation Error when a stratum would cover no time at all.
HazardPartition resolve_partition(const PartitionSpec& spec, TimePoint censor_time,
                                  const Calendar& calendar);

}  // namespace rtprop
