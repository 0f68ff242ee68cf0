#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "drate/dataset.hpp"
#include "drate/design.hpp"
#include "drate/errors.hpp"
#include "drate/least_squares.hpp"

namespace drate {

enum class EstimatorKind { slr, mlr, mcm };

inline const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::slr: return "SLR";
    case EstimatorKind::mlr: return "MLR";
    case EstimatorKind::mcm: return "MCM";
  }
  return "?";
}

inline EstimatorKind parse_estimator(const std::string& s) {
  if (s == "slr" || s == "SLR") return EstimatorKind::slr;
  if (s == "mlr" || s == "MLR") return EstimatorKind::mlr;
  if (s == "mcm" || s == "MCM") return EstimatorKind::mcm;
  raise(errc::invalid_argument, "unknown estimator '" + s + "'");
}

struct AteEstimate {
  EstimatorKind method = EstimatorKind::slr;
  double ate_hat = 0.0;
  double p_hat = 0.0;
  int n = 0;
  std::vector<std::pair<std::string, double>> coefficients;
  LsFit fit;
  std::vector<std::string> warnings;
};

namespace detail {

inline void require_both_groups(const Dataset& ds, const char* who) {
  const int treated = ds.treated_count();
  if (treated == 0 || treated == ds.n)
    raise(errc::all_treated_or_none_treated,
          std::string(who) + " needs both treated and untreated samples");
}

inline std::vector<std::pair<std::string, double>> label_coefficients(
    const DesignMatrix& w, const LsFit& fit) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(fit.beta_hat.size());
  for (std::size_t j = 0; j < fit.beta_hat.size(); ++j)
    out.emplace_back(w.column_labels[j].str(), fit.beta_hat[j]);
  return out;
}

}  // namespace detail

// Difference-in-means estimator: the average outcome of the treated group
// minus the average of the control group. Its value coincides with the
// centered-treatment coefficient of the SLR least-squares fit.
inline AteEstimate estimate_slr(const Dataset& ds) {
  detail::require_both_groups(ds, "SLR");
  const auto design = build_design_matrix(ds, RegressionForm::slr);
  auto fit = solve_least_squares(design, ds.y);

  double sum_t = 0.0, sum_c = 0.0;
  int n_t = 0, n_c = 0;
  for (int i = 0; i < ds.n; ++i) {
    if (ds.t[i]) {
      sum_t += ds.y[i];
      ++n_t;
    } else {
      sum_c += ds.y[i];
      ++n_c;
    }
  }

  AteEstimate est;
  est.method = EstimatorKind::slr;
  est.ate_hat = sum_t / n_t - sum_c / n_c;
  est.p_hat = design.p_hat;
  est.n = ds.n;
  est.coefficients = detail::label_coefficients(design, fit);
  est.fit = std::move(fit);
  return est;
}

// Regression on [t - p, x, 1]; the ATE estimate is the centered-treatment
// coefficient.
inline AteEstimate estimate_mlr(const Dataset& ds) {
  detail::require_both_groups(ds, "MLR");
  const auto design = build_design_matrix(ds, RegressionForm::mlr);
  auto fit = solve_least_squares(design, ds.y);

  AteEstimate est;
  est.method = EstimatorKind::mlr;
  est.ate_hat = fit.beta_hat[0];
  est.p_hat = design.p_hat;
  est.n = ds.n;
  est.coefficients = detail::label_coefficients(design, fit);
  est.fit = std::move(fit);
  return est;
}

// Modified covariate method: regression on [(t - p) x, 1]. Only the
// treatment effect is assumed linear in the covariates; the estimate is
// the mean of x_i^T gamma_hat. A near-zero covariate mean makes the
// estimate degenerate (it needs sum_i x_i != 0), so that case is flagged
// but still returned.
inline AteEstimate estimate_mcm(const Dataset& ds) {
  detail::require_both_groups(ds, "MCM");
  const auto design = build_design_matrix(ds, RegressionForm::mcm);
  auto fit = solve_least_squares(design, ds.y);

  AteEstimate est;
  est.method = EstimatorKind::mcm;
  est.p_hat = design.p_hat;
  est.n = ds.n;

  double ate = 0.0;
  bool all_means_near_zero = true;
  for (int j = 0; j < ds.d; ++j) {
    const double mean_j = ds.covariate_mean(j);
    if (std::fabs(mean_j) >= 1e-8) all_means_near_zero = false;
    ate += mean_j * fit.beta_hat[j];
  }
  est.ate_hat = ate;
  if (all_means_near_zero) est.warnings.push_back("NearZeroCovariateMean");
  est.coefficients = detail::label_coefficients(design, fit);
  est.fit = std::move(fit);
  return est;
}

inline AteEstimate estimate(const Dataset& ds, EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::slr: return estimate_slr(ds);
    case EstimatorKind::mlr: return estimate_mlr(ds);
    case EstimatorKind::mcm: return estimate_mcm(ds);
  }
  raise(errc::invalid_argument, "bad estimator kind");
}

}  // namespace drate
