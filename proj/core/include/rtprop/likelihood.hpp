#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rtprop/domain.hpp"

namespace rtprop {

/// Evaluations reject parameter values that push a log argument below half
/// an individual: the event's own-group risk count (whose log the
/// likelihood takes) and the mixture denominator n0 + rho*n1. The opposite
/// group's count may legitimately reach zero once that group is fully
/// depleted, so it carries no margin.
inline constexpr double kRiskCountMargin = 0.5;

/// Estimated group-specific risk-set sizes just before an event:
///   n1_hat = (N - U(t)) * pi       - L1(t)
///   n0_hat = (N - U(t)) * (1 - pi) - L0(t)
/// where U(t) counts unlabeled events strictly before t and Lj(t) counts
/// labeled group-j events strictly before t. Real-valued by construction:
/// unlabeled responders are prorated by pi, never rounded.
struct RiskCounts {
  double n0_hat = 0.0;
  double n1_hat = 0.0;
};

/// Flattened, partition-annotated view of a validated tie-broken dataset.
/// Built once and shared by every likelihood evaluation in a fit.
struct EventTable {
  std::vector<double> time;
  std::vector<std::int8_t> label;    // 0, 1, or -1 when the label is missing
  std::vector<std::int32_t> stratum; // partition index of each event time
  // Strict-past prefix state: the event itself is in its own risk set.
  std::vector<double> at_risk_base;  // M_i = N - (unlabeled events before i)
  std::vector<double> before0;       // labeled reference-group events before i
  std::vector<double> before1;       // labeled group-of-interest events before i
  std::int64_t population = 0;
  int num_strata = 0;
  std::size_t n_labeled = 0;

  static EventTable build(const SurveyDataset& d, const HazardPartition& p);

  std::size_t size() const { return time.size(); }
};

/// Lower feasible bound on pi (exclusive) given the data: the largest pi
/// for which every labeled event still sees n1_hat >= margin; analogously
/// for the upper bound through n0_hat.
struct PiBounds {
  double lower = 0.0;
  double upper = 1.0;
};
PiBounds feasible_pi_bounds(const EventTable& t, double margin = kRiskCountMargin);

/// Log partial likelihood with analytic derivatives. The score is ordered
/// (U_pi, U_rho_1 .. U_rho_K). The Hessian is stored in its natural sparse
/// blocks: the rho-rho block is exactly diagonal because each event term
/// touches only the hazard ratio of its own stratum.
struct LikelihoodEvaluation {
  double loglik = 0.0;
  std::vector<double> score;        // size K+1 when requested
  double h_pipi = 0.0;              // d2 loglik / dpi2
  std::vector<double> h_pirho;      // cross terms, size K
  std::vector<double> h_rhorho;     // diagonal of the rho block, size K
  std::optional<std::vector<double>> per_event_terms;

  bool feasible = true;
  std::size_t infeasible_event = 0;  // first event violating the margin
  int infeasible_group = -1;  // 0/1: own-group count, 2: denominator

  /// Dense symmetric (K+1)x(K+1) Hessian, row-major; off-diagonal rho
  /// entries are exact zeros.
  std::vector<double> hessian_dense() const;
};

/// What evaluate() should compute; loglik always is.
struct EvalRequest {
  bool score = false;
  bool hessian = false;
  bool per_event_terms = false;
};

LikelihoodEvaluation evaluate(const EventTable& t, const ModelParams& params,
                              const EvalRequest& req = {},
                              double margin = kRiskCountMargin);

// ---- Spec-level operations (thin wrappers over the kernel) ----

/// Risk counts at the event_index-th event time (0-based). Values may be
/// non-positive for infeasible pi; callers decide what that means.
RiskCounts risk_counts(const SurveyDataset& d, double pi, std::size_t event_index);
RiskCounts risk_counts(const EventTable& t, double pi, std::size_t event_index);

/// Pr(label = 1 | arrival at this event time, history). The event must be
/// labeled and params feasible.
double conditional_arrival_prob(const SurveyDataset& d, const HazardPartition& p,
                                const ModelParams& params, std::size_t event_index);

LikelihoodEvaluation log_partial_likelihood(const SurveyDataset& d,
                                            const HazardPartition& p,
                                            const ModelParams& params);

std::vector<double> score(const SurveyDataset& d, const HazardPartition& p,
                          const ModelParams& params);

/// Full evaluation including the Hessian blocks.
LikelihoodEvaluation hessian(const SurveyDataset& d, const HazardPartition& p,
                             const ModelParams& params);

/// Profile (observed) information for pi computed from the NEGATED Hessian:
///   I(pi) = (-H_pipi) - sum_k H_pirho_k^2 / (-H_rhorho_k),
/// positive at a proper maximum; var(pi_hat) ~= 1 / I(pi_hat).
struct ProfileInformationResult {
  bool ok = false;
  double information = 0.0;
  int singular_stratum = -1;  // set when some rho block has zero curvature
};
ProfileInformationResult profile_information(const SurveyDataset& d,
                                             const HazardPartition& p,
                                             const ModelParams& params);
ProfileInformationResult profile_information_from(const LikelihoodEvaluation& ev);

}  // namespace rtprop
