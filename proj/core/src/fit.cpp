#include "rtprop/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "rtprop/error.hpp"

namespace rtprop {

namespace {

constexpr double kBoundaryTolerance = 1e-6;  // "pinned" distance to the pi bounds
constexpr double kMaxTransformedStep = 4.0;
constexpr double kMinLineSearchScale = 1e-14;

double logit(double p) { return std::log(p / (1.0 - p)); }
double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct TransformedDerivatives {
  std::vector<double> grad;     // gradient in optimizer coordinates
  double neg_a = 0.0;           // negated transformed Hessian, pi-pi
  std::vector<double> neg_b;    // pi-rho column
  std::vector<double> neg_d;    // rho diagonal
};

TransformedDerivatives transform(const LikelihoodEvaluation& ev,
                                 const ModelParams& params, bool raw) {
  const std::size_t k = params.rho.size();
  TransformedDerivatives t;
  t.grad.resize(k + 1);
  t.neg_b.resize(k);
  t.neg_d.resize(k);

  const double pi = params.pi;
  const double slope_pi = raw ? 1.0 : pi * (1.0 - pi);
  const double curve_pi = raw ? 0.0 : pi * (1.0 - pi) * (1.0 - 2.0 * pi);

  t.grad[0] = ev.score[0] * slope_pi;
  t.neg_a = -(ev.h_pipi * slope_pi * slope_pi + ev.score[0] * curve_pi);
  for (std::size_t j = 0; j < k; ++j) {
    const double rho = params.rho[j];
    const double slope_rho = raw ? 1.0 : rho;
    const double curve_rho = raw ? 0.0 : rho;
    t.grad[j + 1] = ev.score[j + 1] * slope_rho;
    t.neg_b[j] = -(ev.h_pirho[j] * slope_pi * slope_rho);
    t.neg_d[j] = -(ev.h_rhorho[j] * slope_rho * slope_rho +
                   ev.score[j + 1] * curve_rho);
  }
  return t;
}

// Solves [[a, b^T], [b, diag(d)]] s = g through the Schur complement of the
// arrowhead structure; valid only when the matrix is positive definite.
bool arrowhead_solve(const TransformedDerivatives& t, std::vector<double>& s) {
  const std::size_t k = t.neg_d.size();
  for (double dj : t.neg_d) {
    if (!(dj > 0.0)) return false;
  }
  double schur = t.neg_a;
  double carry = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    schur -= t.neg_b[j] * t.neg_b[j] / t.neg_d[j];
    carry += t.neg_b[j] * t.grad[j + 1] / t.neg_d[j];
  }
  if (!(schur > 0.0)) return false;
  s.assign(k + 1, 0.0);
  s[0] = (t.grad[0] - carry) / schur;
  for (std::size_t j = 0; j < k; ++j) {
    s[j + 1] = (t.grad[j + 1] - t.neg_b[j] * s[0]) / t.neg_d[j];
  }
  return true;
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

ModelParams untransform(const std::vector<double>& theta, bool raw) {
  ModelParams p;
  if (raw) {
    p.pi = theta[0];
    p.rho.assign(theta.begin() + 1, theta.end());
  } else {
    p.pi = expit(theta[0]);
    p.rho.resize(theta.size() - 1);
    for (std::size_t j = 1; j < theta.size(); ++j) p.rho[j - 1] = std::exp(theta[j]);
  }
  return p;
}

bool params_sane(const ModelParams& p) {
  if (!(p.pi > 1e-12 && p.pi < 1.0 - 1e-12)) return false;
  for (double r : p.rho) {
    if (!(r > 1e-12 && r < 1e12) || !std::isfinite(r)) return false;
  }
  return true;
}

double condition_number(const LikelihoodEvaluation& ev) {
  const auto dense = ev.hessian_dense();
  const auto dim = static_cast<Eigen::Index>(ev.h_rhorho.size() + 1);
  Eigen::MatrixXd m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      m(r, c) = -dense[static_cast<std::size_t>(r * dim + c)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::not_converged: return "not_converged";
    case FitStatus::boundary: return "boundary";
    case FitStatus::singular_information: return "singular_information";
  }
  return "unknown";
}

FitResult fit(const SurveyDataset& d, const HazardPartition& p, const FitConfig& cfg) {
  if (cfg.max_iterations < 1 || !(cfg.gradient_tolerance > 0.0) ||
      !(cfg.step_shrink > 0.0 && cfg.step_shrink < 1.0)) {
    throw Error(ErrorCategory::validation, "bad fit config");
  }
  if (cfg.pi_init.has_value() && !(*cfg.pi_init > 0.0 && *cfg.pi_init < 1.0)) {
    throw Error(ErrorCategory::validation, "pi_init must lie in (0, 1)");
  }
  if (cfg.rho_init.has_value() &&
      (!(*cfg.rho_init > 0.0) || !std::isfinite(*cfg.rho_init))) {
    throw Error(ErrorCategory::validation, "rho_init must be positive and finite");
  }

  const SurveyDataset broken = break_ties(d, cfg.tie_seed);
  if (auto findings = validate_dataset(broken); !findings.empty()) {
    throw Error(ErrorCategory::validation,
                "dataset failed validation: " + to_string(findings.front()));
  }
  if (auto findings = validate_partition(p, broken); !findings.empty()) {
    throw Error(ErrorCategory::validation,
                "partition failed validation: " + to_string(findings.front()));
  }

  const EventTable table = EventTable::build(broken, p);
  const auto k = static_cast<std::size_t>(p.num_strata);
  const PiBounds bounds = feasible_pi_bounds(table);
  if (!(bounds.lower < bounds.upper)) {
    throw Error(ErrorCategory::infeasible,
                "no feasible pi: every value pushes a risk count below the margin");
  }

  // "auto" start: the labeled sample proportion, a deliberately biased
  // value the optimizer has to escape under selection.
  double pi0;
  if (cfg.pi_init.has_value()) {
    pi0 = *cfg.pi_init;
  } else {
    double n1 = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table.label[i] == 1) n1 += 1.0;
    }
    pi0 = n1 / std::max(1.0, static_cast<double>(table.n_labeled));
  }
  const double width = bounds.upper - bounds.lower;
  pi0 = std::clamp(pi0, bounds.lower + 1e-3 * width, bounds.upper - 1e-3 * width);
  const double rho0 = std::clamp(cfg.rho_init.value_or(1.0), 1e-6, 1e6);

  const bool raw = cfg.raw_parameterization;
  std::vector<double> theta(k + 1);
  theta[0] = raw ? pi0 : logit(pi0);
  for (std::size_t j = 0; j < k; ++j) theta[j + 1] = raw ? rho0 : std::log(rho0);

  EvalRequest full;
  full.score = true;
  full.hessian = true;

  FitResult result;
  result.tie_seed = cfg.tie_seed;
  result.pi_lower_bound = bounds.lower;
  result.pi_upper_bound = bounds.upper;
  result.rho_hat.resize(k);
  result.rho_se.assign(k, std::numeric_limits<double>::quiet_NaN());

  ModelParams params = untransform(theta, raw);
  LikelihoodEvaluation ev = evaluate(table, params, full);
  if (!ev.feasible) {
    throw Error(ErrorCategory::infeasible,
                "initial parameters infeasible at event " +
                    std::to_string(ev.infeasible_event));
  }

  bool grad_converged = false;
  int iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    if (cfg.keep_trace) result.loglik_trace.push_back(ev.loglik);
    result.gradient_norm_at_exit = sup_norm(ev.score);
    if (result.gradient_norm_at_exit < cfg.gradient_tolerance) {
      grad_converged = true;
      break;
    }

    const TransformedDerivatives t = transform(ev, params, raw);
    std::vector<double> step;
    if (!arrowhead_solve(t, step)) {
      step = t.grad;  // ascent fallback off the concave region
    }
    const double norm = sup_norm(step);
    if (norm > kMaxTransformedStep) {
      const double scale = kMaxTransformedStep / norm;
      for (double& x : step) x *= scale;
    }

    // Accept a step when it raises the log likelihood, or — once changes
    // drown in evaluation round-off — when it strictly shrinks the raw
    // gradient norm without a real decrease. The polish rule lets Newton
    // finish its quadratic phase on a numerically flat surface.
    const double noise = 1024.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + std::abs(ev.loglik));
    double scale = 1.0;
    bool accepted = false;
    while (scale >= kMinLineSearchScale) {
      std::vector<double> trial_theta(theta);
      for (std::size_t j = 0; j < trial_theta.size(); ++j) {
        trial_theta[j] += scale * step[j];
      }
      ModelParams trial = untransform(trial_theta, raw);
      if (params_sane(trial)) {
        LikelihoodEvaluation trial_ev = evaluate(table, trial, full);
        const bool better = trial_ev.feasible && trial_ev.loglik >= ev.loglik;
        const bool polish = trial_ev.feasible &&
                            trial_ev.loglik >= ev.loglik - noise &&
                            sup_norm(trial_ev.score) < sup_norm(ev.score);
        if (better || polish) {
          theta = std::move(trial_theta);
          params = std::move(trial);
          const bool moved = trial_ev.loglik != ev.loglik ||
                             sup_norm(trial_ev.score) != sup_norm(ev.score);
          ev = std::move(trial_ev);
          accepted = moved;
          break;
        }
      }
      scale *= cfg.step_shrink;
    }
    if (!accepted) break;  // no acceptable step at any scale
  }

  result.iterations = iter;
  result.loglik_at_max = ev.loglik;
  result.gradient_norm_at_exit = sup_norm(ev.score);
  result.pi_hat = params.pi;
  result.rho_hat = params.rho;
  grad_converged = result.gradient_norm_at_exit < cfg.gradient_tolerance;

  const bool pinned = params.pi <= bounds.lower + kBoundaryTolerance ||
                      params.pi >= bounds.upper - kBoundaryTolerance;

  // Observed information in raw (pi, rho) coordinates.
  bool pd = true;
  for (std::size_t j = 0; j < k; ++j) {
    if (!(-ev.h_rhorho[j] > 0.0)) pd = false;
  }
  const auto info = profile_information_from(ev);
  if (!info.ok || !(info.information > 0.0)) pd = false;

  if (pd) {
    result.pi_se = 1.0 / std::sqrt(info.information);
    for (std::size_t j = 0; j < k; ++j) {
      const double dj = -ev.h_rhorho[j];
      const double bj = -ev.h_pirho[j];
      result.rho_se[j] = std::sqrt(1.0 / dj + bj * bj / (dj * dj * info.information));
    }
    result.hessian_condition = condition_number(ev);
  } else {
    result.pi_se = std::numeric_limits<double>::quiet_NaN();
    result.hessian_condition = std::numeric_limits<double>::infinity();
  }

  if (pinned) {
    result.status = FitStatus::boundary;
  } else if (!pd) {
    result.status = FitStatus::singular_information;
  } else if (grad_converged) {
    result.status = FitStatus::converged;
  } else {
    result.status = FitStatus::not_converged;
  }
  result.converged = result.status == FitStatus::converged;

  result.weak_identification_warning = weak_identification_check(broken, p, result);
  return result;
}

std::optional<std::string> weak_identification_check(const SurveyDataset& d,
                                                     const HazardPartition& p,
                                                     const FitResult& result) {
  std::int64_t n_labeled = 0;
  for (const auto& r : d.records) {
    if (r.observed && r.label.has_value()) ++n_labeled;
  }
  std::string reasons;
  auto add = [&](const std::string& r) {
    if (!reasons.empty()) reasons += "; ";
    reasons += r;
  };

  if (p.num_strata > 0 && d.censor_time > 0.0 && n_labeled > 0) {
    const double per_stratum =
        static_cast<double>(n_labeled) / static_cast<double>(p.num_strata);
    const double daily = static_cast<double>(n_labeled) / d.censor_time;
    if (per_stratum < kWeakIdMinDaysPerStratum * daily) {
      add("mean labeled events per stratum (" + std::to_string(per_stratum) +
          ") below " + std::to_string(kWeakIdMinDaysPerStratum) +
          " days of average daily volume (" + std::to_string(daily) + "/day)");
    }
  }
  if (!(result.pi_se <= kWeakIdMaxPiSe)) {
    add("pi standard error " + std::to_string(result.pi_se) + " exceeds " +
        std::to_string(kWeakIdMaxPiSe));
  }
  if (!(result.hessian_condition <= kWeakIdMaxCondition)) {
    add("negated Hessian condition number " +
        std::to_string(result.hessian_condition) + " exceeds 1e8");
  }
  if (reasons.empty()) return std::nullopt;
  return "weak identification: " + reasons;
}

std::vector<ProfilePoint> profile_curve(const SurveyDataset& d,
                                        const HazardPartition& p,
                                        std::span<const double> pi_grid,
                                        const FitConfig& cfg) {
  const SurveyDataset broken = break_ties(d, cfg.tie_seed);
  const EventTable table = EventTable::build(broken, p);
  const auto k = static_cast<std::size_t>(p.num_strata);
  const PiBounds bounds = feasible_pi_bounds(table);

  std::vector<ProfilePoint> out;
  for (double pi : pi_grid) {
    if (!(pi > bounds.lower && pi < bounds.upper)) continue;  // absent, not an error

    // Risk counts depend on pi only, so each stratum's profile over log rho
    // is strictly concave and solvable by a safeguarded 1-D Newton.
    std::vector<std::vector<std::pair<double, double>>> counts(k);  // (n0, n1)
    std::vector<double> s1(k, 0.0);
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table.label[i] < 0) continue;
      const double m = table.at_risk_base[i];
      const double n1 = m * pi - table.before1[i];
      const double n0 = m * (1.0 - pi) - table.before0[i];
      const auto j = static_cast<std::size_t>(table.stratum[i]);
      counts[j].emplace_back(n0, n1);
      if (table.label[i] == 1) s1[j] += 1.0;
    }

    ModelParams params;
    params.pi = pi;
    params.rho.resize(k, 1.0);
    const double u_lo = std::log(1e-8);
    const double u_hi = std::log(1e8);
    for (std::size_t j = 0; j < k; ++j) {
      double u = 0.0;
      for (int it = 0; it < 100; ++it) {
        double g = s1[j];
        double h = 0.0;
        const double rho = std::exp(u);
        for (const auto& [n0, n1] : counts[j]) {
          const double w = rho * n1;
          g -= w / (n0 + w);
          h -= w * n0 / ((n0 + w) * (n0 + w));
        }
        if (std::abs(g) < 1e-12 * std::max(1.0, s1[j]) || h == 0.0) break;
        u = std::clamp(u - g / h, u_lo, u_hi);
      }
      params.rho[j] = std::exp(u);
    }

    const auto ev = evaluate(table, params);
    if (!ev.feasible) continue;
    out.push_back({pi, ev.loglik, params.rho});
  }
  return out;
}

}  // namespace rtprop
