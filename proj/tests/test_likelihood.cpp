#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rtprop/error.hpp"
#include "rtprop/fit.hpp"
#include "rtprop/likelihood.hpp"
#include "rtprop/partition.hpp"
#include "rtprop/simulator.hpp"

using namespace rtprop;

namespace {

ResponseRecord labeled(double t, int x) {
  ResponseRecord r;
  r.time = t;
  r.label = x;
  r.observed = true;
  return r;
}

ResponseRecord unlabeled(double t) {
  ResponseRecord r;
  r.time = t;
  r.observed = false;
  return r;
}

SurveyDataset tiny_dataset() {
  // N=6, four labeled events, two unit nonrespondents. Feasible pi spans
  // roughly (0.25, 0.58): the margin binds hard at this scale.
  SurveyDataset d;
  d.population_size = 6;
  d.censor_time = 10.0;
  d.records = {labeled(1.0, 1), labeled(2.5, 0), labeled(4.0, 0), labeled(7.5, 1)};
  return d;
}

SurveyDataset tiny_with_item_nonresponse() {
  // Same shape with an unlabeled responder in the middle; feasible pi is
  // roughly (0.30, 0.50).
  SurveyDataset d;
  d.population_size = 6;
  d.censor_time = 10.0;
  d.records = {labeled(1.0, 1), labeled(2.5, 0), unlabeled(3.0), labeled(4.0, 0),
               labeled(7.5, 1)};
  return d;
}

// Random small dataset for derivative sweeps: uniform times, mixed labels,
// some item nonresponse.
SurveyDataset random_dataset(std::uint64_t seed, std::int64_t population,
                             double censor_time) {
  std::mt19937_64 g(seed);
  auto u01 = [&g] { return static_cast<double>(g() >> 11) * 0x1.0p-53; };
  SurveyDataset d;
  d.population_size = population;
  d.censor_time = censor_time;
  const auto responders =
      static_cast<std::size_t>(static_cast<double>(population) * (0.3 + 0.4 * u01()));
  for (std::size_t i = 0; i < responders; ++i) {
    const double t = 0.05 + (censor_time - 0.1) * u01();
    if (u01() < 0.12) {
      d.records.push_back(unlabeled(t));
    } else {
      d.records.push_back(labeled(t, u01() < 0.35 ? 1 : 0));
    }
  }
  std::sort(d.records.begin(), d.records.end(),
            [](const ResponseRecord& a, const ResponseRecord& b) {
              return a.time < b.time;
            });
  return d;
}

ModelParams random_feasible_params(std::uint64_t seed, const EventTable& table) {
  std::mt19937_64 g(seed);
  auto u01 = [&g] { return static_cast<double>(g() >> 11) * 0x1.0p-53; };
  const auto bounds = feasible_pi_bounds(table);
  ModelParams p;
  p.pi = bounds.lower + (0.15 + 0.7 * u01()) * (bounds.upper - bounds.lower);
  p.rho.resize(static_cast<std::size_t>(table.num_strata));
  for (auto& r : p.rho) r = std::exp(-1.0 + 2.0 * u01());  // rho in [e^-1, e]
  return p;
}

}  // namespace

TEST_CASE("risk counts at the first event need no history") {
  auto d = tiny_dataset();
  for (double pi : {0.1, 0.37, 0.8}) {
    auto rc = risk_counts(d, pi, 0);
    CHECK(rc.n1_hat == doctest::Approx(6.0 * pi).epsilon(1e-14));
    CHECK(rc.n0_hat == doctest::Approx(6.0 * (1.0 - pi)).epsilon(1e-14));
  }
}

TEST_CASE("risk counts prorate unlabeled responders by pi") {
  // N=10, prior history: one labeled X=1 and one unlabeled event.
  SurveyDataset d;
  d.population_size = 10;
  d.censor_time = 100.0;
  d.records = {labeled(1.0, 1), unlabeled(2.0), labeled(3.0, 0)};
  auto rc = risk_counts(d, 0.5, 2);
  CHECK(rc.n1_hat == doctest::Approx(3.5).epsilon(1e-14));  // (10-1)*0.5 - 1
  CHECK(rc.n0_hat == doctest::Approx(4.5).epsilon(1e-14));  // (10-1)*0.5 - 0
}

TEST_CASE("fully labeled data: risk counts equal exact remaining group sizes") {
  std::mt19937_64 g(321);
  SurveyDataset d;
  d.population_size = 40;
  d.censor_time = 50.0;
  std::int64_t n1_total = 0;
  for (int i = 0; i < 40; ++i) {
    const int x = (g() % 5 < 2) ? 1 : 0;
    n1_total += x;
    d.records.push_back(labeled(0.5 + static_cast<double>(i), x));
  }
  const double true_pi = static_cast<double>(n1_total) / 40.0;
  auto table = EventTable::build(d, make_constant_partition(d.censor_time));

  std::int64_t remaining1 = n1_total;
  std::int64_t remaining0 = 40 - n1_total;
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto rc = risk_counts(table, true_pi, i);
    CHECK(rc.n1_hat == doctest::Approx(static_cast<double>(remaining1)).epsilon(1e-8));
    CHECK(rc.n0_hat == doctest::Approx(static_cast<double>(remaining0)).epsilon(1e-8));
    (*d.records[i].label == 1 ? remaining1 : remaining0) -= 1;
  }
}

TEST_CASE("risk counts satisfy the bookkeeping identity") {
  // n0_hat + n1_hat == (N - unlabeled before t) - labeled before t, at any pi.
  auto d = tiny_with_item_nonresponse();
  auto table = EventTable::build(d, make_constant_partition(d.censor_time));
  for (double pi : {0.31, 0.4, 0.49}) {
    double labeled_before = 0.0;
    double unlabeled_before = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
      auto rc = risk_counts(table, pi, i);
      const double expected =
          (static_cast<double>(d.population_size) - unlabeled_before) - labeled_before;
      CHECK(rc.n0_hat + rc.n1_hat == doctest::Approx(expected).epsilon(1e-12));
      if (table.label[i] < 0) {
        unlabeled_before += 1.0;
      } else {
        labeled_before += 1.0;
      }
    }
  }
}

TEST_CASE("conditional arrival probability: anchor values") {
  auto part1 = make_constant_partition(100.0);

  SUBCASE("rho=1 at the first event reduces to pi") {
    SurveyDataset d;
    d.population_size = 50;
    d.censor_time = 100.0;
    d.records = {labeled(1.0, 1)};
    ModelParams params{0.3, {1.0}};
    CHECK(conditional_arrival_prob(d, part1, params, 0) ==
          doctest::Approx(0.3).epsilon(1e-14));
  }

  SUBCASE("rho=2 with equal risk sets gives 2/3") {
    SurveyDataset d;
    d.population_size = 50;
    d.censor_time = 100.0;
    d.records = {labeled(1.0, 0)};
    ModelParams params{0.5, {2.0}};
    CHECK(conditional_arrival_prob(d, part1, params, 0) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  }

  SUBCASE("N=1000 with 100 prior events") {
    SurveyDataset d;
    d.population_size = 1000;
    d.censor_time = 100.0;
    // 70 labeled 0, 20 labeled 1, 10 unlabeled, then the event of interest.
    double t = 0.0;
    for (int i = 0; i < 70; ++i) d.records.push_back(labeled(t += 0.01, 0));
    for (int i = 0; i < 20; ++i) d.records.push_back(labeled(t += 0.01, 1));
    for (int i = 0; i < 10; ++i) d.records.push_back(unlabeled(t += 0.01));
    d.records.push_back(labeled(t += 0.01, 1));
    ModelParams params{0.2, {2.0}};
    // n1 = 990*0.2 - 20 = 178, n0 = 990*0.8 - 70 = 722.
    CHECK(conditional_arrival_prob(d, part1, params, 100) ==
          doctest::Approx(356.0 / 1078.0).epsilon(1e-12));
  }
}

TEST_CASE("single labeled event at rho=1, pi=0.5, N=2 gives log(1/2)") {
  SurveyDataset d;
  d.population_size = 2;
  d.censor_time = 5.0;
  d.records = {labeled(1.0, 1)};
  auto ev = log_partial_likelihood(d, make_constant_partition(5.0), {0.5, {1.0}});
  REQUIRE(ev.feasible);
  CHECK(ev.loglik == doctest::Approx(std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("likelihood factorizes into sequential conditional probabilities") {
  auto d = tiny_with_item_nonresponse();
  auto part = make_constant_partition(d.censor_time);
  ModelParams params{0.4, {1.7}};
  auto ev = log_partial_likelihood(d, part, params);
  REQUIRE(ev.feasible);

  double sum = 0.0;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    if (!d.records[i].observed) continue;
    const double p1 = conditional_arrival_prob(d, part, params, i);
    sum += (*d.records[i].label == 1) ? std::log(p1) : std::log(1.0 - p1);
  }
  CHECK(ev.loglik == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("tiny dataset matches the independent sequential-product oracle") {
  for (auto d : {tiny_dataset(), tiny_with_item_nonresponse()}) {
    auto part = make_constant_partition(d.censor_time);
    for (auto [pi, rho] : {std::pair{0.35, 1.0}, {0.45, 2.0}, {0.48, 0.55}}) {
      auto ev = log_partial_likelihood(d, part, {pi, {rho}});
      REQUIRE(ev.feasible);
      const double ref = oracle::sequential_loglik(d, part, pi, {rho});
      CHECK(ev.loglik == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("score matches central finite differences at a reference point") {
  auto d = random_dataset(2024, 120, 30.0);
  auto part = make_constant_partition(30.0);
  auto table = EventTable::build(d, part);
  ModelParams params{0.25, {1.8}};
  EvalRequest req;
  req.score = true;
  auto ev = evaluate(table, params, req);
  REQUIRE(ev.feasible);

  const double h = 1e-6;
  const double fd_pi = oracle::central_difference(
      [&](double pi) { return evaluate(table, {pi, params.rho}).loglik; }, params.pi,
      h);
  CHECK(ev.score[0] == doctest::Approx(fd_pi).epsilon(1e-5));

  const double fd_rho = oracle::central_difference(
      [&](double r) { return evaluate(table, {params.pi, {r}}).loglik; },
      params.rho[0], h);
  CHECK(ev.score[1] == doctest::Approx(fd_rho).epsilon(1e-5));
}

TEST_CASE("score matches finite differences per stratum on a K=3 partition") {
  auto d = random_dataset(77, 150, 30.0);
  auto part = resolve_partition(PartitionSpec::with_breakpoints({10.0, 20.0}), 30.0,
                                Calendar{});
  auto table = EventTable::build(d, part);
  ModelParams params{0.3, {1.8, 0.9, 1.2}};
  EvalRequest req;
  req.score = true;
  auto ev = evaluate(table, params, req);
  REQUIRE(ev.feasible);

  const double h = 1e-6;
  for (std::size_t k = 0; k < 3; ++k) {
    const double fd = oracle::central_difference(
        [&](double r) {
          ModelParams p = params;
          p.rho[k] = r;
          return evaluate(table, p).loglik;
        },
        params.rho[k], h);
    CHECK(ev.score[k + 1] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("hessian matches finite differences of the score") {
  auto d = random_dataset(99, 100, 25.0);
  auto part = resolve_partition(PartitionSpec::with_breakpoints({12.0}), 25.0,
                                Calendar{});
  auto table = EventTable::build(d, part);
  ModelParams params{0.35, {1.4, 0.8}};
  EvalRequest req;
  req.score = true;
  req.hessian = true;
  auto ev = evaluate(table, params, req);
  REQUIRE(ev.feasible);

  const double h = 1e-5;
  auto score_at = [&](const ModelParams& p) {
    EvalRequest r;
    r.score = true;
    return evaluate(table, p, r).score;
  };

  const auto fd_pipi = oracle::central_difference(
      [&](double pi) { return score_at({pi, params.rho})[0]; }, params.pi, h);
  CHECK(ev.h_pipi == doctest::Approx(fd_pipi).epsilon(1e-4));

  for (std::size_t k = 0; k < 2; ++k) {
    const auto fd_pirho = oracle::central_difference(
        [&](double r) {
          ModelParams p = params;
          p.rho[k] = r;
          return score_at(p)[0];
        },
        params.rho[k], h);
    CHECK(ev.h_pirho[k] == doctest::Approx(fd_pirho).epsilon(1e-4));

    const auto fd_rhorho = oracle::central_difference(
        [&](double r) {
          ModelParams p = params;
          p.rho[k] = r;
          return score_at(p)[k + 1];
        },
        params.rho[k], h);
    CHECK(ev.h_rhorho[k] == doctest::Approx(fd_rhorho).epsilon(1e-4));
  }
}

TEST_CASE("rho-rho off-diagonal Hessian entries are exactly zero") {
  auto d = random_dataset(4242, 200, 30.0);
  auto part = resolve_partition(PartitionSpec::with_breakpoints({8.0, 16.0, 24.0}),
                                30.0, Calendar{});
  auto ev = hessian(d, part, {0.3, {1.0, 1.5, 0.7, 1.2}});
  auto dense = ev.hessian_dense();
  const std::size_t dim = 5;
  for (std::size_t a = 1; a < dim; ++a) {
    for (std::size_t b = 1; b < dim; ++b) {
      if (a == b) continue;
      CHECK(dense[a * dim + b] == 0.0);
    }
  }
  // Cross-check: perturbing rho_j never moves U_rho_k (exact zeros by
  // structure, not by cancellation).
  auto s1 = score(d, part, {0.3, {1.0, 1.5, 0.7, 1.2}});
  auto s2 = score(d, part, {0.3, {1.0, 2.5, 0.7, 1.2}});
  CHECK(s1[3] == s2[3]);
  CHECK(s1[4] == s2[4]);
}

TEST_CASE("score/hessian consistency sweep over random datasets and params") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto d = random_dataset(seed * 13, 60 + static_cast<std::int64_t>(seed * 7), 20.0);
    auto part = (seed % 2 == 0)
                    ? make_constant_partition(20.0)
                    : resolve_partition(PartitionSpec::with_breakpoints({9.5}), 20.0,
                                        Calendar{});
    auto table = EventTable::build(d, part);
    auto params = random_feasible_params(seed * 31 + 5, table);
    EvalRequest req;
    req.score = true;
    req.hessian = true;
    auto ev = evaluate(table, params, req);
    if (!ev.feasible) continue;
    ++checked;

    const double h = 1e-6;
    const double fd_pi = oracle::central_difference(
        [&](double pi) { return evaluate(table, {pi, params.rho}).loglik; },
        params.pi, h);
    CHECK(ev.score[0] ==
          doctest::Approx(fd_pi).epsilon(1e-5).scale(std::abs(ev.score[0]) + 1.0));

    const auto fd_h = oracle::central_difference(
        [&](double pi) {
          EvalRequest r;
          r.score = true;
          return evaluate(table, {pi, params.rho}, r).score[0];
        },
        params.pi, 1e-5);
    CHECK(ev.h_pipi ==
          doctest::Approx(fd_h).epsilon(1e-4).scale(std::abs(ev.h_pipi) + 1.0));
  }
  CHECK(checked >= 20);
}

TEST_CASE("profile information matches the direct 2x2 inverse for K=1") {
  auto d = random_dataset(888, 150, 30.0);
  auto part = make_constant_partition(30.0);
  ModelParams params{0.3, {1.5}};
  auto ev = hessian(d, part, params);

  const double a = -ev.h_pipi;
  const double b = -ev.h_pirho[0];
  const double dd = -ev.h_rhorho[0];
  const double var_direct = dd / (a * dd - b * b);  // [ (−H)^{-1} ]_pipi

  auto info = profile_information(d, part, params);
  REQUIRE(info.ok);
  CHECK(info.information == doctest::Approx(1.0 / var_direct).epsilon(1e-10));
}

TEST_CASE("profile information reports the stratum with zero curvature") {
  LikelihoodEvaluation ev;
  ev.h_pipi = -4.0;
  ev.h_pirho = {-1.0, -2.0};
  ev.h_rhorho = {-3.0, 0.0};
  auto info = profile_information_from(ev);
  CHECK_FALSE(info.ok);
  CHECK(info.singular_stratum == 1);
}

TEST_CASE("survey-scale standard error lands near one percent") {
  // The profile information is only guaranteed positive at the maximizer
  // (away from it the pi-rho ridge makes the Schur complement change sign),
  // so evaluate I at the fitted pi_hat.
  ScenarioConfig cfg;
  cfg.population_size = 100000;
  cfg.true_pi = 0.2;
  cfg.hazard = HazardSpec::constant(0.00736, 2.0);
  cfg.censor_time = 42.0;
  cfg.item_response_rate = 0.95;
  cfg.rng_seed = 31;
  auto sim = simulate_survey(cfg);
  auto part = make_constant_partition(42.0);
  auto result = fit(sim.dataset, part);
  REQUIRE(result.converged);
  auto info = profile_information(sim.dataset, part, {result.pi_hat, result.rho_hat});
  REQUIRE(info.ok);
  const double se = 1.0 / std::sqrt(info.information);
  CHECK(se == doctest::Approx(result.pi_se).epsilon(1e-9));
  CHECK(se >= 0.005);
  CHECK(se <= 0.015);

  // Doubling N shrinks the SE by about 1/sqrt(2).
  cfg.population_size = 200000;
  cfg.rng_seed = 32;
  auto sim2 = simulate_survey(cfg);
  auto result2 = fit(sim2.dataset, part);
  REQUIRE(result2.converged);
  const double shrink = result2.pi_se / se;
  CHECK(shrink > (1.0 / std::sqrt(2.0)) * 0.9);
  CHECK(shrink < (1.0 / std::sqrt(2.0)) * 1.1);
}

TEST_CASE("relabeling symmetry: l(1-pi, 1/rho) on flipped labels is exact") {
  auto d = random_dataset(5555, 180, 30.0);
  auto part = resolve_partition(PartitionSpec::with_breakpoints({15.0}), 30.0,
                                Calendar{});
  SurveyDataset flipped = d;
  for (auto& r : flipped.records) {
    if (r.label.has_value()) r.label = 1 - *r.label;
  }
  ModelParams params{0.3, {1.6, 0.75}};
  ModelParams mirrored{0.7, {1.0 / 1.6, 1.0 / 0.75}};
  auto ev = log_partial_likelihood(d, part, params);
  auto ev_m = log_partial_likelihood(flipped, part, mirrored);
  REQUIRE(ev.feasible);
  REQUIRE(ev_m.feasible);
  CHECK(ev.loglik == doctest::Approx(ev_m.loglik).epsilon(1e-12));
}

TEST_CASE("an unlabeled final event contributes nothing") {
  auto d = tiny_dataset();
  d.records.push_back(unlabeled(9.0));  // strictly after every labeled event
  SurveyDataset trimmed = tiny_dataset();

  auto part = make_constant_partition(10.0);
  ModelParams params{0.45, {1.3}};
  auto full = log_partial_likelihood(d, part, params);
  auto cut = log_partial_likelihood(trimmed, part, params);
  CHECK(full.loglik == cut.loglik);  // bitwise: identical term sequences
}

TEST_CASE("rho=1 reduces conditional probabilities to the ignorable regime") {
  auto d = tiny_dataset();
  auto part = make_constant_partition(d.censor_time);
  ModelParams params{0.42, {1.0}};
  auto table = EventTable::build(d, part);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    if (!d.records[i].observed) continue;
    auto rc = risk_counts(table, params.pi, i);
    CHECK(conditional_arrival_prob(d, part, params, i) ==
          doctest::Approx(rc.n1_hat / (rc.n0_hat + rc.n1_hat)).epsilon(1e-14));
  }
}

TEST_CASE("infeasible parameters report the first offending event") {
  SurveyDataset d;
  d.population_size = 4;
  d.censor_time = 10.0;
  d.records = {labeled(1.0, 1), labeled(2.0, 1), labeled(3.0, 1)};
  auto table = EventTable::build(d, make_constant_partition(10.0));
  // pi = 0.3: n1_hat at the second event = 4*0.3 - 1 = 0.2 < margin.
  auto ev = evaluate(table, {0.3, {1.0}});
  CHECK_FALSE(ev.feasible);
  CHECK(ev.infeasible_event == 1);
  CHECK(ev.infeasible_group == 1);
  CHECK(std::isinf(ev.loglik));

  auto bounds = feasible_pi_bounds(table);
  CHECK(bounds.lower == doctest::Approx((2.0 + 0.5) / 4.0));  // last event binds
}
