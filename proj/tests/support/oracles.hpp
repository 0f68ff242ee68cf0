#pragma once

// Independent oracles for the test suite. These deliberately avoid the
// library's solution paths: regression goes through explicit normal
// equations with a dense inverse, and tail probabilities go through
// adaptive quadrature of the raw densities rather than the continued
// fraction.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "drate/design.hpp"
#include "drate/errors.hpp"

namespace oracles {

// Gauss-Jordan inverse with partial pivoting; fine for the tiny systems
// the tests use.
inline std::vector<double> invert_dense(std::vector<double> a, int n) {
  std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i) * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[static_cast<std::size_t>(r) * n + col]) >
          std::fabs(a[static_cast<std::size_t>(pivot) * n + col]))
        pivot = r;
    if (a[static_cast<std::size_t>(pivot) * n + col] == 0.0)
      throw std::runtime_error("oracle: singular matrix");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a[static_cast<std::size_t>(pivot) * n + c],
                  a[static_cast<std::size_t>(col) * n + c]);
        std::swap(inv[static_cast<std::size_t>(pivot) * n + c],
                  inv[static_cast<std::size_t>(col) * n + c]);
      }
    }
    const double piv = a[static_cast<std::size_t>(col) * n + col];
    for (int c = 0; c < n; ++c) {
      a[static_cast<std::size_t>(col) * n + c] /= piv;
      inv[static_cast<std::size_t>(col) * n + c] /= piv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a[static_cast<std::size_t>(r) * n + col];
      if (factor == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a[static_cast<std::size_t>(r) * n + c] -=
            factor * a[static_cast<std::size_t>(col) * n + c];
        inv[static_cast<std::size_t>(r) * n + c] -=
            factor * inv[static_cast<std::size_t>(col) * n + c];
      }
    }
  }
  return inv;
}

// beta = (W^T W)^(-1) W^T y on raw row-major entries.
inline std::vector<double> normal_equation_solve(const std::vector<double>& w,
                                                 int rows, int cols,
                                                 const std::vector<double>& y) {
  std::vector<double> xtx(static_cast<std::size_t>(cols) * cols, 0.0);
  std::vector<double> xty(cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double wij = w[static_cast<std::size_t>(i) * cols + j];
      xty[j] += wij * y[i];
      for (int k = 0; k < cols; ++k)
        xtx[static_cast<std::size_t>(j) * cols + k] +=
            wij * w[static_cast<std::size_t>(i) * cols + k];
    }
  }
  const auto inv = invert_dense(xtx, cols);
  std::vector<double> beta(cols, 0.0);
  for (int j = 0; j < cols; ++j)
    for (int k = 0; k < cols; ++k)
      beta[j] += inv[static_cast<std::size_t>(j) * cols + k] * xty[k];
  return beta;
}

inline std::vector<double> normal_equation_solve(const drate::DesignMatrix& w,
                                                 const std::vector<double>& y) {
  return normal_equation_solve(w.entries, w.rows, w.cols, y);
}

// Adaptive Simpson on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol, int depth = 24) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fhi, double fmid, double whole,
          int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, mid, flo, fmid, flm, left, d - 1) +
           rec(mid, hi, fmid, fhi, frm, right, d - 1);
  };
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fb, fm, whole, depth);
}

// Two-sided Student-t p-value by integrating the unnormalized density on
// u = |t| + s/(1-s), normalized by the half-line integral.
inline double t_pvalue_quadrature(double t, double dof) {
  const double at = std::fabs(t);
  auto density = [dof](double u) {
    return std::pow(1.0 + u * u / dof, -(dof + 1.0) / 2.0);
  };
  auto tail_from = [&](double start) {
    auto g = [&](double s) {
      const double u = start + s / (1.0 - s);
      const double jac = 1.0 / ((1.0 - s) * (1.0 - s));
      return density(u) * jac;
    };
    return adaptive_simpson(g, 0.0, 1.0 - 1e-9, 1e-12);
  };
  const double tail = tail_from(at);
  const double half = tail_from(0.0);
  return std::min(1.0, tail / half);
}

// Upper-tail F p-value by integrating the unnormalized density
// u^(q1/2 - 1) (1 + q1 u / dof)^(-(q1 + dof)/2). The substitution u = s^2
// removes the q1 = 1 endpoint singularity in the normalization integral.
inline double f_pvalue_quadrature(double fstat, int q1, double dof) {
  auto density = [q1, dof](double u) {
    return std::pow(u, q1 / 2.0 - 1.0) *
           std::pow(1.0 + q1 * u / dof, -(q1 + dof) / 2.0);
  };
  auto tail_from = [&](double start) {
    auto g = [&](double s) {
      const double u = start + s / (1.0 - s);
      const double jac = 1.0 / ((1.0 - s) * (1.0 - s));
      return density(u) * jac;
    };
    return adaptive_simpson(g, 0.0, 1.0 - 1e-9, 1e-12);
  };
  auto head_to = [&](double stop) {
    // integral of density on [0, stop] with u = s^2; the Jacobian folds
    // the endpoint singularity into s^(q1-1), finite for q1 >= 1
    auto g = [&](double s) {
      return 2.0 * std::pow(s, q1 - 1.0) *
             std::pow(1.0 + q1 * s * s / dof, -(q1 + dof) / 2.0);
    };
    return adaptive_simpson(g, 0.0, std::sqrt(stop), 1e-12);
  };
  const double split = std::max(1.0, fstat);
  const double total = head_to(split) + tail_from(split);
  if (fstat <= split) {
    const double head = head_to(fstat);
    return std::min(1.0, std::max(0.0, (total - head) / total));
  }
  return std::min(1.0, tail_from(fstat) / total);
}

// Kolmogorov-Smirnov statistic against U(0, 1).
inline double ks_uniform(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    d = std::max(d, std::fabs(v[i] - static_cast<double>(i + 1) / n));
    d = std::max(d, std::fabs(v[i] - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace oracles
