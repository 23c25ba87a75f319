#include "rtprop/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rtprop/error.hpp"
#include "kahan.hpp"

namespace rtprop {

EventTable EventTable::build(const SurveyDataset& d, const HazardPartition& p) {
  EventTable t;
  const std::size_t n = d.records.size();
  t.time.reserve(n);
  t.label.reserve(n);
  t.stratum.reserve(n);
  t.at_risk_base.reserve(n);
  t.before0.reserve(n);
  t.before1.reserve(n);
  t.population = d.population_size;
  t.num_strata = p.num_strata;

  double unlabeled_before = 0.0;
  double l0 = 0.0;
  double l1 = 0.0;
  double prev_time = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = d.records[i];
    if (i > 0 && r.time <= prev_time) {
      throw Error(ErrorCategory::validation,
                  "event times must be strictly increasing; run break_ties first "
                  "(record " + std::to_string(i) + ")");
    }
    prev_time = r.time;
    const int k = p.index_of(r.time);
    if (k < 0) {
      throw Error(ErrorCategory::validation,
                  "event time " + std::to_string(r.time) +
                      " is outside the partition's coverage of [0, tau)");
    }
    const bool labeled = r.observed && r.label.has_value();
    t.time.push_back(r.time);
    t.label.push_back(labeled ? static_cast<std::int8_t>(*r.label)
                              : static_cast<std::int8_t>(-1));
    t.stratum.push_back(k);
    t.at_risk_base.push_back(static_cast<double>(d.population_size) - unlabeled_before);
    t.before0.push_back(l0);
    t.before1.push_back(l1);
    if (labeled) {
      t.n_labeled += 1;
      if (*r.label == 1) {
        l1 += 1.0;
      } else {
        l0 += 1.0;
      }
    } else {
      unlabeled_before += 1.0;
    }
  }
  return t;
}

PiBounds feasible_pi_bounds(const EventTable& t, double margin) {
  // The margin binds the count whose log enters the likelihood: n1_hat at
  // group-1 events, n0_hat at group-0 events. The cross count may reach
  // zero (a fully depleted group is a legitimate state, e.g. complete
  // observation); the denominator check happens per evaluation because it
  // involves rho.
  PiBounds b;
  b.lower = 0.0;
  b.upper = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.label[i] < 0) continue;
    const double m = t.at_risk_base[i];
    if (m <= 0.0) continue;
    if (t.label[i] == 1) {
      // n1_hat = m*pi - before1 >= margin  =>  pi >= (before1 + margin) / m
      b.lower = std::max(b.lower, (t.before1[i] + margin) / m);
    } else {
      // n0_hat = m*(1-pi) - before0 >= margin  =>  pi <= 1 - (before0 + margin)/m
      b.upper = std::min(b.upper, 1.0 - (t.before0[i] + margin) / m);
    }
  }
  return b;
}

LikelihoodEvaluation evaluate(const EventTable& t, const ModelParams& params,
                              const EvalRequest& req, double margin) {
  const int num_strata = t.num_strata;
  LikelihoodEvaluation ev;
  if (static_cast<int>(params.rho.size()) != num_strata) {
    throw Error(ErrorCategory::validation,
                "params.rho has " + std::to_string(params.rho.size()) +
                    " entries but the partition has " + std::to_string(num_strata) +
                    " strata");
  }

  const double pi = params.pi;
  detail::KahanSum loglik;
  detail::KahanSum u_pi;
  detail::KahanSum h_pipi;
  std::vector<detail::KahanSum> u_rho;
  std::vector<detail::KahanSum> h_pirho;
  std::vector<detail::KahanSum> h_rhorho;
  if (req.score) u_rho.resize(static_cast<std::size_t>(num_strata));
  if (req.hessian) {
    h_pirho.resize(static_cast<std::size_t>(num_strata));
    h_rhorho.resize(static_cast<std::size_t>(num_strata));
  }
  if (req.per_event_terms) {
    ev.per_event_terms.emplace();
    ev.per_event_terms->reserve(t.size());
  }

  for (std::size_t i = 0; i < t.size(); ++i) {
    const int x = t.label[i];
    if (x < 0) {
      // Item-nonresponse events contribute factor 1; their depletion effect
      // is already baked into at_risk_base for later events.
      if (req.per_event_terms) ev.per_event_terms->push_back(0.0);
      continue;
    }
    const double m = t.at_risk_base[i];
    const double n1 = m * pi - t.before1[i];
    const double n0 = m * (1.0 - pi) - t.before0[i];
    // Margin rule: the count whose log is taken stays half an individual
    // away from zero, and so does the mixture denominator. The cross count
    // may hit zero (fully depleted group).
    if ((x == 1 && n1 < margin) || (x == 0 && n0 < margin)) {
      ev.feasible = false;
      ev.infeasible_event = i;
      ev.infeasible_group = x;
      ev.loglik = -std::numeric_limits<double>::infinity();
      return ev;
    }
    const auto k = static_cast<std::size_t>(t.stratum[i]);
    const double rho = params.rho[k];
    const double den = n0 + rho * n1;
    if (den < margin) {
      ev.feasible = false;
      ev.infeasible_event = i;
      ev.infeasible_group = 2;  // denominator, not a single group
      ev.loglik = -std::numeric_limits<double>::infinity();
      return ev;
    }

    const double term = (x == 1)
                            ? std::log(rho) + std::log(n1) - std::log(den)
                            : std::log(n0) - std::log(den);
    loglik.add(term);
    if (req.per_event_terms) ev.per_event_terms->push_back(term);

    if (req.score || req.hessian) {
      // dn1/dpi = m, dn0/dpi = -m, dden/dpi = m*(rho - 1).
      if (x == 1) {
        u_pi.add(m / n1 - m * (rho - 1.0) / den);
      } else {
        u_pi.add(-m / n0 - m * (rho - 1.0) / den);
      }
      if (req.score) {
        u_rho[k].add((x == 1 ? 1.0 / rho : 0.0) - n1 / den);
      }
      if (req.hessian) {
        const double den2 = den * den;
        const double rm1 = rho - 1.0;
        double h = m * m * rm1 * rm1 / den2;
        if (x == 1) {
          h -= m * m / (n1 * n1);
        } else {
          h -= m * m / (n0 * n0);
        }
        h_pipi.add(h);
        h_pirho[k].add(-m * (n0 + n1) / den2);
        h_rhorho[k].add((x == 1 ? -1.0 / (rho * rho) : 0.0) + n1 * n1 / den2);
      }
    }
  }

  ev.loglik = loglik.value();
  if (req.score) {
    ev.score.resize(static_cast<std::size_t>(num_strata) + 1);
    ev.score[0] = u_pi.value();
    for (int k = 0; k < num_strata; ++k) {
      ev.score[static_cast<std::size_t>(k) + 1] = u_rho[static_cast<std::size_t>(k)].value();
    }
  }
  if (req.hessian) {
    ev.h_pipi = h_pipi.value();
    ev.h_pirho.resize(static_cast<std::size_t>(num_strata));
    ev.h_rhorho.resize(static_cast<std::size_t>(num_strata));
    for (int k = 0; k < num_strata; ++k) {
      ev.h_pirho[static_cast<std::size_t>(k)] = h_pirho[static_cast<std::size_t>(k)].value();
      ev.h_rhorho[static_cast<std::size_t>(k)] = h_rhorho[static_cast<std::size_t>(k)].value();
    }
  }
  return ev;
}

std::vector<double> LikelihoodEvaluation::hessian_dense() const {
  const std::size_t k = h_rhorho.size();
  const std::size_t dim = k + 1;
  std::vector<double> h(dim * dim, 0.0);
  h[0] = h_pipi;
  for (std::size_t j = 0; j < k; ++j) {
    h[(j + 1) * dim] = h_pirho[j];
    h[j + 1] = h_pirho[j];
    h[(j + 1) * dim + (j + 1)] = h_rhorho[j];
  }
  return h;
}

RiskCounts risk_counts(const EventTable& t, double pi, std::size_t event_index) {
  if (event_index >= t.size()) {
    throw Error(ErrorCategory::validation, "event index out of range");
  }
  const double m = t.at_risk_base[event_index];
  return {m * (1.0 - pi) - t.before0[event_index],
          m * pi - t.before1[event_index]};
}

RiskCounts risk_counts(const SurveyDataset& d, double pi, std::size_t event_index) {
  auto t = EventTable::build(d, make_constant_partition(d.censor_time));
  return risk_counts(t, pi, event_index);
}

double conditional_arrival_prob(const SurveyDataset& d, const HazardPartition& p,
                                const ModelParams& params, std::size_t event_index) {
  auto t = EventTable::build(d, p);
  if (event_index >= t.size()) {
    throw Error(ErrorCategory::validation, "event index out of range");
  }
  if (t.label[event_index] < 0) {
    throw Error(ErrorCategory::validation,
                "conditional arrival probability requires a labeled event");
  }
  const auto rc = risk_counts(t, params.pi, event_index);
  if (rc.n0_hat < kRiskCountMargin || rc.n1_hat < kRiskCountMargin) {
    throw Error(ErrorCategory::infeasible,
                "risk count below margin at event " + std::to_string(event_index));
  }
  const double rho = params.rho.at(static_cast<std::size_t>(t.stratum[event_index]));
  return rho * rc.n1_hat / (rc.n0_hat + rho * rc.n1_hat);
}

LikelihoodEvaluation log_partial_likelihood(const SurveyDataset& d,
                                            const HazardPartition& p,
                                            const ModelParams& params) {
  return evaluate(EventTable::build(d, p), params);
}

std::vector<double> score(const SurveyDataset& d, const HazardPartition& p,
                          const ModelParams& params) {
  EvalRequest req;
  req.score = true;
  auto ev = evaluate(EventTable::build(d, p), params, req);
  if (!ev.feasible) {
    throw Error(ErrorCategory::infeasible,
                "infeasible params at event " + std::to_string(ev.infeasible_event));
  }
  return ev.score;
}

LikelihoodEvaluation hessian(const SurveyDataset& d, const HazardPartition& p,
                             const ModelParams& params) {
  EvalRequest req;
  req.score = true;
  req.hessian = true;
  auto ev = evaluate(EventTable::build(d, p), params, req);
  if (!ev.feasible) {
    throw Error(ErrorCategory::infeasible,
                "infeasible params at event " + std::to_string(ev.infeasible_event));
  }
  return ev;
}

ProfileInformationResult profile_information_from(const LikelihoodEvaluation& ev) {
  ProfileInformationResult out;
  double info = -ev.h_pipi;
  for (std::size_t k = 0; k < ev.h_rhorho.size(); ++k) {
    if (ev.h_rhorho[k] == 0.0) {
      out.singular_stratum = static_cast<int>(k);
      return out;
    }
    info -= ev.h_pirho[k] * ev.h_pirho[k] / (-ev.h_rhorho[k]);
  }
  out.ok = true;
  out.information = info;
  return out;
}

ProfileInformationResult profile_information(const SurveyDataset& d,
                                             const HazardPartition& p,
                                             const ModelParams& params) {
  return profile_information_from(hessian(d, p, params));
}

}  // namespace rtprop
