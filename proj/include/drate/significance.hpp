#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "drate/dataset.hpp"
#include "drate/design.hpp"
#include "drate/errors.hpp"
#include "drate/estimators.hpp"
#include "drate/least_squares.hpp"

namespace drate {

namespace detail {

// Lentz-style continued fraction for the incomplete beta function
// (evaluated only for x below the symmetry switch point).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-30;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  raise(errc::domain_error, "incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
// with the standard symmetry switch at x = (a+1)/(a+b+2).
inline double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    raise(errc::domain_error, "incomplete beta needs a > 0 and b > 0");
  if (!(x >= 0.0 && x <= 1.0))
    raise(errc::domain_error, "incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_prefactor = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                              a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_prefactor);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Two-sided Student-t p-value with dof degrees of freedom,
// P(|T| >= |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2).
inline double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) raise(errc::domain_error, "dof must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(dof / (dof + t * t), dof / 2.0, 0.5);
}

// Upper-tail F p-value, P(F_{q1, dof} >= f) = I_{dof/(dof+q1 f)}(dof/2, q1/2).
inline double f_upper_tail_p(double f, int q1, double dof) {
  if (!(dof > 0.0) || q1 < 1) raise(errc::domain_error, "bad F-test dof");
  if (std::isinf(f)) return 0.0;
  return regularized_incomplete_beta(dof / (dof + q1 * f), dof / 2.0, q1 / 2.0);
}

struct TTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool perfect_fit = false;
};

struct FTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool perfect_fit = false;
};

namespace detail {

// A residual sum of squares this far below the outcome's scale is treated
// as a perfect fit (zero residual variance).
inline bool is_perfect_fit(double rss, double y_norm2) {
  return rss <= 1e-20 * (1.0 + y_norm2);
}

inline std::vector<double> reconstruct_outcome(const LsFit& fit, const DesignMatrix& w) {
  std::vector<double> y(w.rows);
  for (int i = 0; i < w.rows; ++i) {
    double pred = 0.0;
    for (int j = 0; j < w.cols; ++j) pred += w.at(i, j) * fit.beta_hat[j];
    y[i] = pred + fit.residuals[i];
  }
  return y;
}

}  // namespace detail

// t statistic and two-sided p-value for H0: beta_j = 0, with the standard
// error taken from sigma2_hat * [(W^T W)^(-1)]_jj. A perfect fit has no
// residual variance; it reports p = 0 for a nonzero coefficient and p = 1
// otherwise, flagged.
inline TTestResult t_test(const LsFit& fit, const DesignMatrix& w, int coeff_index) {
  if (coeff_index < 0 || coeff_index >= w.cols)
    raise(errc::invalid_argument, "coefficient index out of range");
  if (fit.dof_residual < 1)
    raise(errc::invalid_argument, "t-test needs at least 1 residual dof");
  if (static_cast<int>(fit.beta_hat.size()) != w.cols)
    raise(errc::length_mismatch, "fit does not match design");

  const auto y = detail::reconstruct_outcome(fit, w);
  double y_norm2 = 0.0;
  for (double v : y) y_norm2 += v * v;

  TTestResult out;
  const double beta_j = fit.beta_hat[coeff_index];
  if (detail::is_perfect_fit(fit.residual_sum_squares, y_norm2)) {
    out.perfect_fit = true;
    double scale = 0.0;
    for (double b : fit.beta_hat) scale = std::max(scale, std::fabs(b));
    const bool nonzero = std::fabs(beta_j) > 1e-12 * (1.0 + scale);
    out.statistic = nonzero ? std::numeric_limits<double>::infinity() : 0.0;
    out.p_value = nonzero ? 0.0 : 1.0;
    return out;
  }

  const double sigma2 = fit.residual_sum_squares / fit.dof_residual;
  const auto qr = detail::householder_qr(w.entries.data(), w.rows, w.cols);
  const auto inv_diag = detail::xtx_inverse_diagonal(qr);
  const double se = std::sqrt(sigma2 * inv_diag[coeff_index]);
  out.statistic = beta_j / se;
  out.p_value = student_t_two_sided_p(out.statistic, fit.dof_residual);
  return out;
}

// F statistic against the intercept-only model:
//   F = ((RSS0 - RSS) / q1) / (RSS / dof),  q1 = non-intercept columns.
// A constant outcome has nothing to explain and reports F = 0, p = 1.
inline FTestResult f_test(const LsFit& fit, const DesignMatrix& w) {
  if (w.cols < 2)
    raise(errc::invalid_argument, "F-test needs at least one non-intercept column");
  if (fit.dof_residual < 1)
    raise(errc::invalid_argument, "F-test needs at least 1 residual dof");
  if (static_cast<int>(fit.beta_hat.size()) != w.cols)
    raise(errc::length_mismatch, "fit does not match design");

  const auto y = detail::reconstruct_outcome(fit, w);
  double y_mean = 0.0, y_norm2 = 0.0;
  for (double v : y) {
    y_mean += v;
    y_norm2 += v * v;
  }
  y_mean /= static_cast<double>(y.size());
  double rss0 = 0.0;
  for (double v : y) rss0 += (v - y_mean) * (v - y_mean);

  const int q1 = w.cols - 1;
  const double rss = fit.residual_sum_squares;

  FTestResult out;
  if (rss0 - rss <= 0.0 || detail::is_perfect_fit(rss0, y_norm2)) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    out.perfect_fit = detail::is_perfect_fit(rss, y_norm2);
    return out;
  }
  if (detail::is_perfect_fit(rss, y_norm2)) {
    out.perfect_fit = true;
    out.statistic = std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    return out;
  }
  out.statistic = ((rss0 - rss) / q1) / (rss / fit.dof_residual);
  out.p_value = f_upper_tail_p(out.statistic, q1, fit.dof_residual);
  return out;
}

struct SignificanceReport {
  EstimatorKind method = EstimatorKind::slr;
  double t_statistic = 0.0;
  double t_p_value = 1.0;
  double f_statistic = 0.0;
  double f_p_value = 1.0;
  int dof_model = 0;     // non-intercept columns
  int dof_residual = 0;
  double sigma2_hat = 0.0;
  bool perfect_fit = false;
};

// Fits the estimator's design and tests the treatment-effect coefficient
// (t) and the full regression (F).
inline SignificanceReport significance_report(const Dataset& ds, EstimatorKind method) {
  RegressionForm form = RegressionForm::slr;
  if (method == EstimatorKind::mlr) form = RegressionForm::mlr;
  if (method == EstimatorKind::mcm) form = RegressionForm::mcm;
  if (method == EstimatorKind::mcm) detail::require_both_groups(ds, "MCM");

  const auto design = build_design_matrix(ds, form);
  const auto fit = solve_least_squares(design, ds.y);
  const auto t = t_test(fit, design, 0);
  const auto f = f_test(fit, design);

  SignificanceReport rep;
  rep.method = method;
  rep.t_statistic = t.statistic;
  rep.t_p_value = t.p_value;
  rep.f_statistic = f.statistic;
  rep.f_p_value = f.p_value;
  rep.dof_model = design.cols - 1;
  rep.dof_residual = fit.dof_residual;
  rep.sigma2_hat = fit.residual_sum_squares / fit.dof_residual;
  rep.perfect_fit = t.perfect_fit || f.perfect_fit;
  return rep;
}

}  // namespace drate
