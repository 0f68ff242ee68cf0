#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "drate/errors.hpp"
#include "drate/estimators.hpp"

namespace drate {

// Empirical moments of the per-sample main effect f, treatment effect g,
// and a scalar covariate x, all with the 1/N divisor. These feed the
// closed-form variance comparisons; they require ground truth f and g and
// are therefore only computable on synthetic data.
struct MomentSummary {
  double var_f = 0.0;
  double var_g = 0.0;
  double cov_gf = 0.0;
  double cov_fx = 0.0;
  double cov_gx = 0.0;
  double var_x = 1.0;
  double mean_x = 0.0;
  int n = 0;
};

inline MomentSummary compute_moments(const std::vector<double>& f,
                                     const std::vector<double>& g,
                                     const std::vector<double>& x) {
  const std::size_t n = f.size();
  if (g.size() != n || x.size() != n)
    raise(errc::length_mismatch, "f, g, x must have equal lengths");
  if (n < 2) raise(errc::length_mismatch, "need at least 2 samples");

  double mf = 0.0, mg = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mf += f[i];
    mg += g[i];
    mx += x[i];
  }
  mf /= n;
  mg /= n;
  mx /= n;

  MomentSummary m;
  m.n = static_cast<int>(n);
  m.mean_x = mx;
  double vf = 0, vg = 0, vx = 0, cgf = 0, cfx = 0, cgx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double df = f[i] - mf, dg = g[i] - mg, dx = x[i] - mx;
    vf += df * df;
    vg += dg * dg;
    vx += dx * dx;
    cgf += dg * df;
    cfx += df * dx;
    cgx += dg * dx;
  }
  m.var_f = vf / n;
  m.var_g = vg / n;
  m.var_x = vx / n;
  m.cov_gf = cgf / n;
  m.cov_fx = cfx / n;
  m.cov_gx = cgx / n;
  return m;
}

enum class DeltaSign { negative, zero, positive };

inline const char* delta_sign_name(DeltaSign s) {
  switch (s) {
    case DeltaSign::negative: return "Negative";
    case DeltaSign::zero: return "Zero";
    case DeltaSign::positive: return "Positive";
  }
  return "?";
}

// The gap Var(SLR) - Var(MLR) scaled by p(1-p)N, for a unit-variance
// covariate. Positive delta means MLR has the smaller nominal variance.
// As a quadratic in p it factors with roots p = -k and p = (2 + k)/3 where
// k = cov_fx / cov_gx; k (and the roots) are undefined when cov_gx = 0.
struct DeltaReport {
  double p = 0.0;
  std::optional<double> k;
  double delta = 0.0;
  DeltaSign sign = DeltaSign::zero;
  std::optional<std::array<double, 2>> roots;  // {-k, (2 + k) / 3}
};

namespace detail {

inline double delta_value(double cov_fx, double cov_gx, double p) {
  return cov_fx * cov_fx + 2.0 * (1.0 - p) * cov_gx * cov_fx +
         (2.0 * p - 3.0 * p * p) * cov_gx * cov_gx;
}

inline DeltaSign classify_delta(double delta, double cov_fx, double cov_gx) {
  const double tol = 1e-12 * (1.0 + cov_fx * cov_fx + cov_gx * cov_gx);
  if (delta > tol) return DeltaSign::positive;
  if (delta < -tol) return DeltaSign::negative;
  return DeltaSign::zero;
}

inline void require_p_open_unit(double p) {
  if (!(p > 0.0 && p < 1.0))
    raise(errc::p_out_of_range, "p must lie strictly inside (0, 1), got " +
                                    std::to_string(p));
}

inline void require_unit_variance(double var_x) {
  if (std::fabs(var_x - 1.0) > 1e-6)
    raise(errc::not_standardized,
          "covariate must be standardized to unit variance (var_x = " +
              std::to_string(var_x) + ")");
}

}  // namespace detail

inline DeltaReport delta(const MomentSummary& m, double p) {
  detail::require_p_open_unit(p);
  detail::require_unit_variance(m.var_x);

  DeltaReport r;
  r.p = p;
  r.delta = detail::delta_value(m.cov_fx, m.cov_gx, p);
  r.sign = detail::classify_delta(r.delta, m.cov_fx, m.cov_gx);
  if (m.cov_gx != 0.0) {
    const double k = m.cov_fx / m.cov_gx;
    r.k = k;
    r.roots = std::array<double, 2>{-k, (2.0 + k) / 3.0};
  }
  return r;
}

// Sign of delta over a (p, k) grid under the unit-variance convention
// cov_gx = 1, cov_fx = k. Entries are -1/0/+1, stored k-major. Every entry
// is cross-checked against the closed-form root condition: delta < 0 iff p
// lies outside the interval spanned by -k and (2 + k)/3.
struct SignRegion {
  std::vector<double> p_grid;
  std::vector<double> k_grid;
  std::vector<int> signs;  // k_grid.size() rows, p_grid.size() columns

  int at(std::size_t ki, std::size_t pi) const {
    return signs[ki * p_grid.size() + pi];
  }
};

inline SignRegion delta_sign_region(const std::vector<double>& p_grid,
                                    const std::vector<double>& k_grid) {
  if (p_grid.empty() || k_grid.empty())
    raise(errc::invalid_argument, "empty grid");
  for (std::size_t i = 1; i < p_grid.size(); ++i)
    if (!(p_grid[i] > p_grid[i - 1]))
      raise(errc::invalid_argument, "p grid must be strictly increasing");
  for (std::size_t i = 1; i < k_grid.size(); ++i)
    if (!(k_grid[i] > k_grid[i - 1]))
      raise(errc::invalid_argument, "k grid must be strictly increasing");
  for (double p : p_grid) detail::require_p_open_unit(p);

  SignRegion region;
  region.p_grid = p_grid;
  region.k_grid = k_grid;
  region.signs.resize(p_grid.size() * k_grid.size());

  for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
    const double k = k_grid[ki];
    const double lo = std::min(-k, (2.0 + k) / 3.0);
    const double hi = std::max(-k, (2.0 + k) / 3.0);
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
      const double p = p_grid[pi];
      const double d = detail::delta_value(k, 1.0, p);
      const DeltaSign s = detail::classify_delta(d, k, 1.0);
      // Root-condition cross-check; a disagreement outside the zero band
      // would mean the quadratic factorization is wrong.
      if (s != DeltaSign::zero) {
        const bool outside = p < lo || p > hi;
        if (outside != (s == DeltaSign::negative))
          raise(errc::non_finite,
                "sign-region internal check failed at p=" + std::to_string(p) +
                    " k=" + std::to_string(k));
      }
      region.signs[ki * p_grid.size() + pi] =
          s == DeltaSign::negative ? -1 : (s == DeltaSign::positive ? 1 : 0);
    }
  }
  return region;
}

// CSV grid: header row of p values, then one row per k.
inline std::string sign_region_csv(const SignRegion& region) {
  char buf[64];
  std::string out = "k";
  for (double p : region.p_grid) {
    std::snprintf(buf, sizeof buf, ",%.6g", p);
    out += buf;
  }
  out += "\n";
  for (std::size_t ki = 0; ki < region.k_grid.size(); ++ki) {
    std::snprintf(buf, sizeof buf, "%.6g", region.k_grid[ki]);
    out += buf;
    for (std::size_t pi = 0; pi < region.p_grid.size(); ++pi) {
      std::snprintf(buf, sizeof buf, ",%d", region.at(ki, pi));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

// Second-order ("nominal") variance of the difference-in-means estimator:
//   [(1-p)^2 var_g + var_f + 2(1-p) cov_gf] / (p (1-p) n).
inline double slr_variance_nominal(const MomentSummary& m, double p, int n) {
  detail::require_p_open_unit(p);
  if (n < 1) raise(errc::invalid_argument, "n must be >= 1");
  const double num = (1.0 - p) * (1.0 - p) * m.var_g + m.var_f +
                     2.0 * (1.0 - p) * m.cov_gf;
  return num / (p * (1.0 - p) * n);
}

// Nominal MLR variance, Var(SLR) - delta / (p (1-p) n). May come out
// negative when the second-order expansion is pushed outside its regime;
// reported as computed.
inline double mlr_variance_nominal(const MomentSummary& m, double p, int n) {
  detail::require_p_open_unit(p);
  detail::require_unit_variance(m.var_x);
  if (n < 1) raise(errc::invalid_argument, "n must be >= 1");
  const double d = detail::delta_value(m.cov_fx, m.cov_gx, p);
  return slr_variance_nominal(m, p, n) - d / (p * (1.0 - p) * n);
}

// Nominal MCM variance for the restricted regime it is derived in:
// one-dimensional Gaussian covariate with unit variance and mean mu,
// constant main effect, and treatment effect gamma * x. Outside that
// regime the number is the caller's modeling choice.
inline double mcm_variance_nominal(double gamma, double mu, double p, int n) {
  detail::require_p_open_unit(p);
  if (n < 1) raise(errc::invalid_argument, "n must be >= 1");
  const double mu2 = mu * mu;
  const double num = gamma * gamma * mu2 * p * p * (3.0 + mu2);
  const double den = static_cast<double>(n) * p * (1.0 - p) * (1.0 + mu2) * (1.0 + mu2);
  return num / den;
}

// Second-order approximation of Var(X/Y):
//   var_x / E[Y]^2 - 2 E[X] cov / E[Y]^3 + E[X]^2 var_y / E[Y]^4.
inline double ratio_variance_approx(double mean_num, double var_num,
                                    double mean_den, double var_den,
                                    double cov_nd) {
  if (mean_den == 0.0)
    raise(errc::zero_denominator_mean, "denominator mean must be nonzero");
  const double d2 = mean_den * mean_den;
  return var_num / d2 - 2.0 * mean_num * cov_nd / (d2 * mean_den) +
         mean_num * mean_num * var_den / (d2 * d2);
}

struct EstimatorRanking {
  EstimatorKind best = EstimatorKind::slr;
  EstimatorKind medium = EstimatorKind::mlr;
  EstimatorKind worst = EstimatorKind::mcm;
  bool tied = false;
};

// Ascending-variance ordering. Exact ties keep the fixed label order
// SLR < MLR < MCM and set the tie flag.
inline EstimatorRanking rank_estimators(double var_slr, double var_mlr,
                                        double var_mcm) {
  if (!std::isfinite(var_slr) || !std::isfinite(var_mlr) || !std::isfinite(var_mcm))
    raise(errc::non_finite, "variances must be finite");
  struct Entry {
    EstimatorKind kind;
    double value;
  };
  std::array<Entry, 3> e = {Entry{EstimatorKind::slr, var_slr},
                            Entry{EstimatorKind::mlr, var_mlr},
                            Entry{EstimatorKind::mcm, var_mcm}};
  // Insertion sort keeps equal values in label order.
  for (int i = 1; i < 3; ++i)
    for (int j = i; j > 0 && e[j].value < e[j - 1].value; --j)
      std::swap(e[j], e[j - 1]);
  EstimatorRanking r;
  r.best = e[0].kind;
  r.medium = e[1].kind;
  r.worst = e[2].kind;
  r.tied = e[0].value == e[1].value || e[1].value == e[2].value;
  return r;
}

}  // namespace drate
