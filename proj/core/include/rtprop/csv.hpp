#pragma once

#include <string>

#include "rtprop/comparators.hpp"
#include "rtprop/domain.hpp"

namespace rtprop {

/// Reads the standard input CSV: header "time,label", one row per
/// responding individual, label empty for item nonresponse. N, tau, and the
/// calendar come from configuration, never from the data (nonrespondents
/// are absent from the file by design). Malformed rows raise a validation
/// Error naming the row number.
SurveyDataset read_dataset_csv(const std::string& path, std::int64_t population_size,
                               TimePoint censor_time, const Calendar& calendar);

void write_dataset_csv(const std::string& path, const SurveyDataset& d);

/// Stratum CSV: header "stratum,population_share,count1,count0".
StratumTable read_stratum_csv(const std::string& path);

/// Tidy series CSV: one row per day per metric
/// (day,day_class,metric,value,se).
void write_series_csv(const std::string& path, const std::vector<DailyRow>& daily,
                      const std::vector<HazardRatioRow>& ratio);

}  // namespace rtprop
