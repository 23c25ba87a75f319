#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rtprop/error.hpp"
#include "rtprop/partition.hpp"

using namespace rtprop;

namespace {

// Six-week window opening on a Tuesday with two Monday holidays.
Calendar six_week_calendar() { return Calendar::cyclic(DayClass::tuesday, {20, 34}); }

}  // namespace

TEST_CASE("constant partition covers [0, tau) with one stratum") {
  auto p = resolve_partition(PartitionSpec::constant(), 42.0, six_week_calendar());
  CHECK(p.num_strata == 1);
  CHECK(p.boundaries.front() == 0.0);
  CHECK(p.boundaries.back() == 42.0);
  CHECK(p.index_of(0.0) == 0);
  CHECK(p.index_of(41.999) == 0);
  CHECK(p.index_of(42.0) == -1);
  CHECK(p.index_of(-0.5) == -1);
}

TEST_CASE("every-10-weekdays over six weeks with two holidays gives K=4") {
  // 30 weekday slots minus 2 holidays = 28 weekdays -> blocks of 10, 10, 8
  // plus the pooled weekend/holiday stratum.
  auto p = resolve_partition(PartitionSpec::every_k_weekdays(10), 42.0,
                             six_week_calendar());
  CHECK(p.num_strata == 4);
  CHECK(p.index_of(0.5) == 0);   // Tuesday, first weekday block
  CHECK(p.index_of(4.5) == 3);   // Saturday -> weekend stratum
  CHECK(p.index_of(20.5) == 3);  // holiday Monday -> weekend stratum
  CHECK(p.index_of(41.5) == 2);  // last weekday block
}

TEST_CASE("per-day weekday partition (every-1) gives K=29") {
  auto p = resolve_partition(PartitionSpec::every_k_weekdays(1), 42.0,
                             six_week_calendar());
  CHECK(p.num_strata == 29);  // 28 weekday days + pooled weekend/holiday
}

TEST_CASE("weekday-classes gives K=6") {
  auto p = resolve_partition(PartitionSpec::weekday_classes(), 42.0, six_week_calendar());
  CHECK(p.num_strata == 6);
  CHECK(p.index_of(0.25) == static_cast<int>(DayClass::tuesday));
  CHECK(p.index_of(6.5) == static_cast<int>(DayClass::monday));
  CHECK(p.index_of(4.1) == 5);   // Saturday
  CHECK(p.index_of(20.9) == 5);  // holiday
}

TEST_CASE("weekday-classes on a too-short window is an empty-interval error") {
  // Three days starting Tuesday never reach a weekend.
  CHECK_THROWS_AS(
      resolve_partition(PartitionSpec::weekday_classes(), 3.0, six_week_calendar()),
      Error);
}

TEST_CASE("explicit breakpoints make contiguous segments") {
  auto p = resolve_partition(PartitionSpec::with_breakpoints({10.5, 28.0}), 42.0,
                             six_week_calendar());
  CHECK(p.num_strata == 3);
  CHECK(p.index_of(10.4) == 0);
  CHECK(p.index_of(10.5) == 1);
  CHECK(p.index_of(35.0) == 2);
}

TEST_CASE("breakpoints outside (0, tau) are an error") {
  CHECK_THROWS_AS(
      resolve_partition(PartitionSpec::with_breakpoints({42.0}), 42.0, six_week_calendar()),
      Error);
  CHECK_THROWS_AS(
      resolve_partition(PartitionSpec::with_breakpoints({0.0}), 42.0, six_week_calendar()),
      Error);
  CHECK_THROWS_AS(resolve_partition(PartitionSpec::with_breakpoints({5.0, 5.0}), 42.0,
                                    six_week_calendar()),
                  Error);
}

TEST_CASE("shorthand round trip") {
  CHECK(parse_partition_shorthand("constant").kind == PartitionKind::constant);
  CHECK(parse_partition_shorthand("weekday-classes").kind ==
        PartitionKind::weekday_classes);
  auto every = parse_partition_shorthand("every-15-weekdays");
  CHECK(every.kind == PartitionKind::every_k_weekdays);
  CHECK(every.k == 15);
  auto bp = parse_partition_shorthand("breakpoints:7,14,21");
  CHECK(bp.kind == PartitionKind::breakpoints);
  CHECK(bp.breakpoints == std::vector<double>{7.0, 14.0, 21.0});
  CHECK_THROWS_AS(parse_partition_shorthand("every-zero-weekdays"), Error);
  CHECK(to_string(parse_partition_shorthand("every-15-weekdays")) ==
        "every-15-weekdays");
}

TEST_CASE("partition validation flags strata without labeled events") {
  SurveyDataset d;
  d.population_size = 10;
  d.censor_time = 42.0;
  ResponseRecord r;
  r.time = 1.0;
  r.label = 1;
  r.observed = true;
  d.records = {r};
  auto p = resolve_partition(PartitionSpec::with_breakpoints({21.0}), 42.0,
                             six_week_calendar());
  auto findings = validate_partition(p, d);
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].invariant == "stratum without labeled events");
}
