#include "rtprop/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "rtprop/error.hpp"

namespace rtprop {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

double parse_double(const std::string& s, const std::string& what, std::size_t row) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCategory::validation,
                "row " + std::to_string(row) + ": bad " + what + " value '" + s + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& what, std::size_t row) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCategory::validation,
                "row " + std::to_string(row) + ": bad " + what + " value '" + s + "'");
  }
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCategory::io, "cannot open '" + path + "' for reading");
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot open '" + path + "' for writing");
  }
  return out;
}

}  // namespace

SurveyDataset read_dataset_csv(const std::string& path, std::int64_t population_size,
                               TimePoint censor_time, const Calendar& calendar) {
  auto in = open_input(path);
  SurveyDataset d;
  d.population_size = population_size;
  d.censor_time = censor_time;
  d.calendar = calendar;

  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 2 || fields[0] != "time" || fields[1] != "label") {
        throw Error(ErrorCategory::validation,
                    "row 1: expected header 'time,label', got '" + line + "'");
      }
      continue;
    }
    if (fields.size() != 2) {
      throw Error(ErrorCategory::validation,
                  "row " + std::to_string(row) + ": expected 2 fields, got " +
                      std::to_string(fields.size()));
    }
    ResponseRecord r;
    r.time = parse_double(fields[0], "time", row);
    if (!fields[1].empty()) {
      const std::int64_t label = parse_int(fields[1], "label", row);
      if (label != 0 && label != 1) {
        throw Error(ErrorCategory::validation,
                    "row " + std::to_string(row) + ": label must be 0, 1, or empty");
      }
      r.label = static_cast<int>(label);
      r.observed = true;
    }
    d.records.push_back(r);
  }
  if (!header_seen) {
    throw Error(ErrorCategory::validation, "empty dataset file '" + path + "'");
  }
  return d;
}

void write_dataset_csv(const std::string& path, const SurveyDataset& d) {
  auto out = open_output(path);
  out << "time,label\n";
  out.precision(17);
  for (const auto& r : d.records) {
    out << r.time << ",";
    if (r.observed && r.label.has_value()) out << *r.label;
    out << "\n";
  }
  if (!out) {
    throw Error(ErrorCategory::io, "failed writing '" + path + "'");
  }
}

StratumTable read_stratum_csv(const std::string& path) {
  auto in = open_input(path);
  StratumTable t;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 4 || fields[0] != "stratum" ||
          fields[1] != "population_share" || fields[2] != "count1" ||
          fields[3] != "count0") {
        throw Error(ErrorCategory::validation,
                    "row 1: expected header 'stratum,population_share,count1,count0'");
      }
      continue;
    }
    if (fields.size() != 4) {
      throw Error(ErrorCategory::validation,
                  "row " + std::to_string(row) + ": expected 4 fields");
    }
    StratumCounts s;
    s.name = fields[0];
    s.population_share = parse_double(fields[1], "population_share", row);
    s.count1 = parse_int(fields[2], "count1", row);
    s.count0 = parse_int(fields[3], "count0", row);
    t.strata.push_back(std::move(s));
  }
  if (t.strata.empty()) {
    throw Error(ErrorCategory::validation, "stratum file '" + path + "' has no rows");
  }
  return t;
}

void write_series_csv(const std::string& path, const std::vector<DailyRow>& daily,
                      const std::vector<HazardRatioRow>& ratio) {
  auto out = open_output(path);
  out.precision(12);
  out << "day,day_class,metric,value,se\n";
  for (const auto& r : daily) {
    out << r.day << "," << to_string(r.day_class) << ",count1," << r.count1 << ",\n";
    out << r.day << "," << to_string(r.day_class) << ",count0," << r.count0 << ",\n";
    out << r.day << "," << to_string(r.day_class) << ",proportion,";
    if (r.proportion.has_value()) {
      out << *r.proportion << "," << r.se;
    } else {
      out << ",";
    }
    out << "\n";
  }
  for (const auto& r : ratio) {
    out << r.day << "," << to_string(r.day_class) << ",n0_hat," << r.n0_hat << ",\n";
    out << r.day << "," << to_string(r.day_class) << ",n1_hat," << r.n1_hat << ",\n";
    out << r.day << "," << to_string(r.day_class) << ",hazard_ratio,";
    if (r.ratio.has_value()) {
      out << *r.ratio << "," << r.log_se;
    } else {
      out << ",";
    }
    out << "\n";
  }
  if (!out) {
    throw Error(ErrorCategory::io, "failed writing '" + path + "'");
  }
}

}  // namespace rtprop
