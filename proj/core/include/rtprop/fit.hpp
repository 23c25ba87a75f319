#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtprop/domain.hpp"
#include "rtprop/likelihood.hpp"

namespace rtprop {

struct FitConfig {
  std::optional<double> pi_init;   // empty = "auto": labeled sample proportion
  std::optional<double> rho_init;  // empty = "auto": 1.0 in every stratum
  int max_iterations = 200;
  double gradient_tolerance = 1e-7;  // sup-norm of the raw score at exit
  double step_shrink = 0.5;          // backtracking factor in (0, 1)
  std::uint64_t tie_seed = 0;
  bool raw_parameterization = false; // optimize raw (pi, rho) instead of (logit pi, log rho)
  bool keep_trace = false;           // record accepted loglik per iteration
};

enum class FitStatus { converged, not_converged, boundary, singular_information };
const char* to_string(FitStatus s);

struct FitResult {
  double pi_hat = 0.0;
  double pi_se = 0.0;  // profile information: I(pi_hat)^(-1/2)
  std::vector<double> rho_hat;
  std::vector<double> rho_se;
  double loglik_at_max = 0.0;
  int iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::not_converged;
  double gradient_norm_at_exit = 0.0;
  std::optional<std::string> weak_identification_warning;
  std::uint64_t tie_seed = 0;

  // Data-driven feasible range of pi (margin included), computed once.
  double pi_lower_bound = 0.0;
  double pi_upper_bound = 1.0;
  // Condition number of the negated Hessian at the solution.
  double hessian_condition = 0.0;
  std::vector<double> loglik_trace;  // filled when keep_trace
};

/// Maximizes the partial likelihood over (pi, rho_1..rho_K). Ties are
/// resolved with cfg.tie_seed before anything else; the dataset and
/// partition are validated. Newton steps solve the arrowhead system (dense
/// pi row/column, diagonal rho block) in O(K); when the negated Hessian is
/// not positive definite at the iterate the step falls back to gradient
/// ascent. Infeasible trial steps shrink by cfg.step_shrink.
FitResult fit(const SurveyDataset& d, const HazardPartition& p,
              const FitConfig& cfg = {});

// Weak-identification thresholds. A warning fires when the mean labeled
// events per stratum fall below this many days' worth of average daily
// volume, the pi standard error exceeds the cap, or the negated Hessian
// condition number exceeds the cap.
inline constexpr double kWeakIdMinDaysPerStratum = 5.0;
inline constexpr double kWeakIdMaxPiSe = 0.1;
inline constexpr double kWeakIdMaxCondition = 1e8;

std::optional<std::string> weak_identification_check(const SurveyDataset& d,
                                                     const HazardPartition& p,
                                                     const FitResult& result);

struct ProfilePoint {
  double pi = 0.0;
  double loglik = 0.0;
  std::vector<double> rho;  // maximizer over rho at this pi
};

/// Profile log likelihood over a pi grid: each point maximizes over rho
/// only (independent one-dimensional Newton per stratum, by block
/// diagonality). Infeasible grid values are absent from the result.
std::vector<ProfilePoint> profile_curve(const SurveyDataset& d,
                                        const HazardPartition& p,
                                        std::span<const double> pi_grid,
                                        const FitConfig& cfg = {});

}  // namespace rtprop
