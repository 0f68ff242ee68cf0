#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "drate/errors.hpp"

namespace drate {

// Observational sample: outcome y (kWh in the demand-response setting),
// binary treatment t, and an n-by-d covariate matrix x stored row-major.
struct Dataset {
  std::vector<double> y;
  std::vector<int> t;
  std::vector<double> x;  // row-major, n*d entries
  int n = 0;
  int d = 0;
  std::vector<std::string> column_names;  // d covariate labels

  double x_at(int i, int j) const {
    return x[static_cast<std::size_t>(i) * d + j];
  }

  int treated_count() const {
    int c = 0;
    for (int v : t) c += v;
    return c;
  }

  double treated_fraction() const {
    return static_cast<double>(treated_count()) / n;
  }

  double covariate_mean(int j) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x_at(i, j);
    return s / n;
  }
};

inline void validate_dataset(const Dataset& ds) {
  if (ds.n < 2) raise(errc::invalid_argument, "dataset needs at least 2 samples");
  if (ds.d < 0) raise(errc::invalid_argument, "negative covariate dimension");
  const auto n = static_cast<std::size_t>(ds.n);
  const auto d = static_cast<std::size_t>(ds.d);
  if (ds.y.size() != n || ds.t.size() != n || ds.x.size() != n * d)
    raise(errc::length_mismatch, "y/t/x sizes inconsistent with n and d");
  if (ds.column_names.size() != d)
    raise(errc::length_mismatch, "column_names size inconsistent with d");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(ds.y[i]))
      raise(errc::non_finite_value, "non-finite outcome at row " + std::to_string(i));
    if (ds.t[i] != 0 && ds.t[i] != 1)
      raise(errc::invalid_treatment_value,
            "treatment must be 0 or 1 at row " + std::to_string(i));
  }
  for (std::size_t k = 0; k < ds.x.size(); ++k) {
    if (!std::isfinite(ds.x[k]))
      raise(errc::non_finite_value, "non-finite covariate entry");
  }
}

// Build and validate a dataset; n is derived from y, covariate labels
// default to x1..xd.
inline Dataset make_dataset(std::vector<double> y, std::vector<int> t,
                            std::vector<double> x, int d,
                            std::vector<std::string> column_names = {}) {
  Dataset ds;
  ds.n = static_cast<int>(y.size());
  ds.d = d;
  ds.y = std::move(y);
  ds.t = std::move(t);
  ds.x = std::move(x);
  if (column_names.empty()) {
    for (int j = 1; j <= d; ++j) column_names.push_back("x" + std::to_string(j));
  }
  ds.column_names = std::move(column_names);
  validate_dataset(ds);
  return ds;
}

}  // namespace drate
