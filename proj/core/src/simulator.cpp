#include "rtprop/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rtprop/error.hpp"
#include "rng_util.hpp"

namespace rtprop {

namespace {

double piece_value(const std::vector<HazardPiece>& pieces, double t) {
  double v = pieces.empty() ? 0.0 : pieces.front().value;
  for (const auto& p : pieces) {
    if (p.start <= t) {
      v = p.value;
    } else {
      break;
    }
  }
  return v;
}

// Merged piecewise-constant rate for one group with precomputed cumulative
// hazard at each breakpoint; supports O(log pieces) inverse-transform draws.
struct MergedRate {
  std::vector<double> start;
  std::vector<double> rate;
  std::vector<double> cumhaz;  // at each start

  static MergedRate build(const HazardSpec& h, int group) {
    std::vector<double> starts;
    starts.push_back(0.0);
    for (const auto& p : h.baseline) starts.push_back(p.start);
    if (group == 1) {
      for (const auto& p : h.ratio) starts.push_back(p.start);
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

    MergedRate m;
    m.start = starts;
    m.rate.reserve(starts.size());
    for (double s : starts) {
      double r = piece_value(h.baseline, s);
      if (group == 1) r *= piece_value(h.ratio, s);
      m.rate.push_back(r);
    }
    m.cumhaz.resize(starts.size(), 0.0);
    for (std::size_t i = 1; i < starts.size(); ++i) {
      m.cumhaz[i] = m.cumhaz[i - 1] + m.rate[i - 1] * (starts[i] - starts[i - 1]);
    }
    return m;
  }

  double cumulative(double t) const {
    if (t <= 0.0) return 0.0;
    auto it = std::upper_bound(start.begin(), start.end(), t);
    auto i = static_cast<std::size_t>(it - start.begin()) - 1;
    return cumhaz[i] + rate[i] * (t - start[i]);
  }

  // Smallest t with cumulative(t) = e; rates are positive by validation, so
  // the last piece always absorbs the remainder.
  double invert(double e) const {
    auto it = std::upper_bound(cumhaz.begin(), cumhaz.end(), e);
    auto i = static_cast<std::size_t>(it - cumhaz.begin());
    if (i > 0) --i;
    return start[i] + (e - cumhaz[i]) / rate[i];
  }
};

void require_valid(const HazardSpec& h) {
  auto findings = h.validate();
  if (!findings.empty()) {
    throw Error(ErrorCategory::validation, "invalid hazard spec: " + to_string(findings.front()));
  }
}

void check_pieces(const std::vector<HazardPiece>& pieces, const char* what,
                  bool is_rate, std::vector<ValidationFinding>& out) {
  if (pieces.empty()) {
    out.push_back({std::string(what) + " has no pieces", -1, ""});
    return;
  }
  if (pieces.front().start != 0.0) {
    out.push_back({std::string(what) + " must start at t = 0", -1, ""});
  }
  double prev = -1.0;
  for (const auto& p : pieces) {
    if (p.start <= prev) {
      out.push_back({std::string(what) + " starts must be strictly increasing", -1, ""});
    }
    prev = p.start;
    const double lo = kHazardRateEpsilon;
    const double hi = 1.0 / kHazardRateEpsilon;
    if (!(p.value >= lo && p.value <= hi) || !std::isfinite(p.value)) {
      out.push_back({std::string(what) + " value violates positivity bounds", -1,
                     (is_rate ? "rate " : "ratio ") + std::to_string(p.value)});
    }
  }
}

}  // namespace

HazardSpec HazardSpec::constant(double lambda0, double rho) {
  HazardSpec h;
  h.baseline = {{0.0, lambda0}};
  h.ratio = {{0.0, rho}};
  return h;
}

double HazardSpec::baseline_rate(double t) const { return piece_value(baseline, t); }

double HazardSpec::hazard_ratio(double t) const { return piece_value(ratio, t); }

double HazardSpec::rate(int group, double t) const {
  double r = baseline_rate(t);
  if (group == 1) r *= hazard_ratio(t);
  return r;
}

double HazardSpec::cumulative_hazard(int group, double t) const {
  return MergedRate::build(*this, group).cumulative(t);
}

std::vector<ValidationFinding> HazardSpec::validate() const {
  std::vector<ValidationFinding> out;
  check_pieces(baseline, "baseline hazard", true, out);
  check_pieces(ratio, "hazard ratio", false, out);
  return out;
}

TimePoint sample_response_time(const HazardSpec& h, int group, std::mt19937_64& rng) {
  require_valid(h);
  const auto merged = MergedRate::build(h, group);
  return merged.invert(detail::exponential(rng));
}

SimulatedSurvey simulate_survey(const ScenarioConfig& cfg) {
  if (cfg.population_size < 1) {
    throw Error(ErrorCategory::validation, "scenario population_size must be positive");
  }
  if (!(cfg.true_pi > 0.0 && cfg.true_pi < 1.0)) {
    throw Error(ErrorCategory::validation, "scenario true_pi must lie in (0, 1)");
  }
  if (!(cfg.item_response_rate > 0.0 && cfg.item_response_rate <= 1.0)) {
    throw Error(ErrorCategory::validation, "item_response_rate must lie in (0, 1]");
  }
  require_valid(cfg.hazard);

  // Independent seed streams so times never depend on item-response or
  // group-remainder draws.
  std::uint64_t s = cfg.rng_seed;
  std::mt19937_64 rng_group(detail::splitmix64(s));
  std::mt19937_64 rng_time(detail::splitmix64(s));
  std::mt19937_64 rng_item(detail::splitmix64(s));

  const auto n = static_cast<std::size_t>(cfg.population_size);
  SimulatedSurvey out;
  out.dataset.population_size = cfg.population_size;
  out.dataset.censor_time = cfg.censor_time;
  out.dataset.calendar = cfg.calendar;

  const double exact = static_cast<double>(cfg.population_size) * cfg.true_pi;
  auto n1 = static_cast<std::int64_t>(std::floor(exact));
  const double frac = exact - std::floor(exact);
  if (frac > 0.0 && detail::uniform01(rng_group) < frac) ++n1;
  out.n_group1 = n1;
  out.true_pi = static_cast<double>(n1) / static_cast<double>(cfg.population_size);

  out.all_labels.resize(n, 0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n1); ++i) out.all_labels[i] = 1;

  const auto merged0 = MergedRate::build(cfg.hazard, 0);
  const auto merged1 = MergedRate::build(cfg.hazard, 1);
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = out.all_labels[i] == 1 ? merged1 : merged0;
    times[i] = m.invert(detail::exponential(rng_time));
  }

  out.dataset.records.reserve(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(times[i] < cfg.censor_time)) continue;
    ++out.n_responded;
    const bool item = cfg.item_response_rate >= 1.0 ||
                      detail::uniform01(rng_item) < cfg.item_response_rate;
    ResponseRecord r;
    r.time = times[i];
    r.observed = item;
    if (item) r.label = static_cast<int>(out.all_labels[i]);
    out.dataset.records.push_back(std::move(r));
  }
  std::sort(out.dataset.records.begin(), out.dataset.records.end(),
            [](const ResponseRecord& a, const ResponseRecord& b) {
              return a.time < b.time;
            });
  return out;
}

double ColliderPopulation::true_proportion() const {
  std::int64_t ones = 0;
  for (const auto& c : cells) {
    if (c.label == 1) ones += c.population;
  }
  return static_cast<double>(ones) / static_cast<double>(population_size);
}

std::pair<std::int64_t, std::int64_t> ColliderPopulation::respondent_label_counts() const {
  std::int64_t c1 = 0;
  std::int64_t c0 = 0;
  for (const auto& c : cells) {
    (c.label == 1 ? c1 : c0) += c.respondents;
  }
  return {c1, c0};
}

StratumTable ColliderPopulation::stratum_table() const {
  std::map<std::string, StratumCounts> by_stratum;
  for (const auto& c : cells) {
    auto& s = by_stratum[c.stratum];
    s.name = c.stratum;
    s.population_share += static_cast<double>(c.population) /
                          static_cast<double>(population_size);
    (c.label == 1 ? s.count1 : s.count0) += c.respondents;
  }
  StratumTable t;
  for (auto& [_, s] : by_stratum) t.strata.push_back(std::move(s));
  return t;
}

ColliderPopulation simulate_collider_population(const ColliderSpec& spec) {
  if (spec.cells.empty() || spec.population_size < 1 || spec.respondent_count < 1) {
    throw Error(ErrorCategory::validation, "collider spec is empty or has bad totals");
  }
  double pop_total = 0.0;
  double resp_total = 0.0;
  for (const auto& c : spec.cells) {
    if (c.population_share < 0.0 || c.respondent_share < 0.0) {
      throw Error(ErrorCategory::validation, "collider shares must be nonnegative");
    }
    if (c.label != 0 && c.label != 1) {
      throw Error(ErrorCategory::validation, "collider cell labels must be 0 or 1");
    }
    pop_total += c.population_share;
    resp_total += c.respondent_share;
  }
  if (std::abs(pop_total - 1.0) > 1e-9 || std::abs(resp_total - 1.0) > 1e-9) {
    throw Error(ErrorCategory::validation,
                "collider shares must each sum to 1 (got population " +
                    std::to_string(pop_total) + ", respondents " +
                    std::to_string(resp_total) + ")");
  }

  ColliderPopulation out;
  out.population_size = spec.population_size;
  out.respondent_count = spec.respondent_count;
  std::int64_t pop_sum = 0;
  std::int64_t resp_sum = 0;
  for (const auto& c : spec.cells) {
    ColliderPopulationCell cell;
    cell.stratum = c.stratum;
    cell.label = c.label;
    cell.population = std::llround(c.population_share *
                                   static_cast<double>(spec.population_size));
    cell.respondents = std::llround(c.respondent_share *
                                    static_cast<double>(spec.respondent_count));
    if (cell.respondents > cell.population) {
      throw Error(ErrorCategory::validation,
                  "collider cell '" + c.stratum + "' label " + std::to_string(c.label) +
                      " has more respondents (" + std::to_string(cell.respondents) +
                      ") than members (" + std::to_string(cell.population) + ")");
    }
    pop_sum += cell.population;
    resp_sum += cell.respondents;
    out.cells.push_back(std::move(cell));
  }
  if (pop_sum != spec.population_size || resp_sum != spec.respondent_count) {
    throw Error(ErrorCategory::validation,
                "collider shares do not resolve to integer cell counts matching the totals");
  }
  return out;
}

}  // namespace rtprop
