#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "drate/design.hpp"
#include "drate/errors.hpp"

namespace drate {

struct LsFit {
  std::vector<double> beta_hat;
  std::vector<double> residuals;
  double residual_sum_squares = 0.0;
  int dof_residual = 0;
};

namespace detail {

// Relative tolerance on the R diagonal below which a column is treated as
// collinear with the ones before it.
inline constexpr double kRankTolerance = 1e-10;

// Householder QR of an m-by-n matrix (m >= n), stored column-major in `a`.
// After factorization the upper triangle of `a` holds R; the entries below
// the diagonal hold the reflector tails, with the leading reflector element
// and squared norm kept separately.
struct QrFactors {
  int m = 0;
  int n = 0;
  std::vector<double> a;    // column-major
  std::vector<double> v0;   // leading reflector element per column
  std::vector<double> vtv;  // squared reflector norm per column (0 = skip)

  double r(int i, int j) const { return a[static_cast<std::size_t>(j) * m + i]; }
};

inline QrFactors householder_qr(const double* row_major, int m, int n) {
  QrFactors f;
  f.m = m;
  f.n = n;
  f.a.resize(static_cast<std::size_t>(m) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      f.a[static_cast<std::size_t>(j) * m + i] =
          row_major[static_cast<std::size_t>(i) * n + j];
  f.v0.assign(n, 0.0);
  f.vtv.assign(n, 0.0);

  for (int k = 0; k < n; ++k) {
    double* col = f.a.data() + static_cast<std::size_t>(k) * m;
    double norm2 = 0.0;
    for (int i = k; i < m; ++i) norm2 += col[i] * col[i];
    if (norm2 == 0.0) continue;  // exactly-zero column: R_kk stays 0
    const double norm = std::sqrt(norm2);
    const double alpha = col[k] > 0.0 ? -norm : norm;
    const double v0 = col[k] - alpha;
    const double vtv = norm2 - col[k] * col[k] + v0 * v0;
    for (int j = k + 1; j < n; ++j) {
      double* cj = f.a.data() + static_cast<std::size_t>(j) * m;
      double dot = v0 * cj[k];
      for (int i = k + 1; i < m; ++i) dot += col[i] * cj[i];
      const double s = 2.0 * dot / vtv;
      cj[k] -= s * v0;
      for (int i = k + 1; i < m; ++i) cj[i] -= s * col[i];
    }
    col[k] = alpha;
    f.v0[k] = v0;
    f.vtv[k] = vtv;
  }
  return f;
}

inline void apply_q_transpose(const QrFactors& f, double* y) {
  for (int k = 0; k < f.n; ++k) {
    if (f.vtv[k] == 0.0) continue;
    const double* col = f.a.data() + static_cast<std::size_t>(k) * f.m;
    double dot = f.v0[k] * y[k];
    for (int i = k + 1; i < f.m; ++i) dot += col[i] * y[i];
    const double s = 2.0 * dot / f.vtv[k];
    y[k] -= s * f.v0[k];
    for (int i = k + 1; i < f.m; ++i) y[i] -= s * col[i];
  }
}

inline std::vector<double> back_substitute(const QrFactors& f, const double* qty) {
  std::vector<double> beta(f.n);
  for (int j = f.n - 1; j >= 0; --j) {
    double s = qty[j];
    for (int k = j + 1; k < f.n; ++k) s -= f.r(j, k) * beta[k];
    beta[j] = s / f.r(j, j);
  }
  return beta;
}

// Columns whose R diagonal falls below kRankTolerance times the largest.
inline std::vector<int> deficient_columns(const QrFactors& f) {
  double max_abs = 0.0;
  for (int j = 0; j < f.n; ++j) max_abs = std::max(max_abs, std::fabs(f.r(j, j)));
  std::vector<int> out;
  for (int j = 0; j < f.n; ++j) {
    if (std::fabs(f.r(j, j)) <= kRankTolerance * max_abs) out.push_back(j);
  }
  if (max_abs == 0.0) {
    out.clear();
    for (int j = 0; j < f.n; ++j) out.push_back(j);
  }
  return out;
}

// Diagonal of (W^T W)^(-1) = R^(-1) R^(-T), one forward solve per entry.
inline std::vector<double> xtx_inverse_diagonal(const QrFactors& f) {
  const int n = f.n;
  std::vector<double> diag(n, 0.0);
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) w[i] = 0.0;
    for (int i = j; i < n; ++i) {
      double s = (i == j) ? 1.0 : 0.0;
      for (int k = j; k < i; ++k) s -= f.r(k, i) * w[k];
      w[i] = s / f.r(i, i);
    }
    double acc = 0.0;
    for (int i = j; i < n; ++i) acc += w[i] * w[i];
    diag[j] = acc;
  }
  return diag;
}

}  // namespace detail

// Minimizes ||y - W beta||^2 by Householder QR. Deterministic: identical
// inputs give bit-identical output. Throws RankDeficient when the R
// diagonal collapses, naming the collinear columns.
inline LsFit solve_least_squares(const DesignMatrix& w, const std::vector<double>& y) {
  if (static_cast<int>(y.size()) != w.rows)
    raise(errc::length_mismatch, "outcome length does not match design rows");
  if (w.rows < w.cols)
    raise(errc::dimension_overflow, "fewer rows than columns in design");

  const auto f = detail::householder_qr(w.entries.data(), w.rows, w.cols);
  const auto bad = detail::deficient_columns(f);
  if (!bad.empty()) {
    std::string cols;
    for (int j : bad) {
      if (!cols.empty()) cols += ", ";
      cols += static_cast<std::size_t>(j) < w.column_labels.size()
                  ? w.column_labels[j].str()
                  : "column " + std::to_string(j);
    }
    raise(errc::rank_deficient, "collinear columns: " + cols);
  }

  std::vector<double> qty = y;
  detail::apply_q_transpose(f, qty.data());

  LsFit fit;
  fit.beta_hat = detail::back_substitute(f, qty.data());
  fit.residuals.resize(w.rows);
  double rss = 0.0;
  for (int i = 0; i < w.rows; ++i) {
    double pred = 0.0;
    for (int j = 0; j < w.cols; ++j) pred += w.at(i, j) * fit.beta_hat[j];
    const double r = y[i] - pred;
    fit.residuals[i] = r;
    rss += r * r;
  }
  fit.residual_sum_squares = rss;
  fit.dof_residual = w.rows - w.cols;
  return fit;
}

}  // namespace drate
