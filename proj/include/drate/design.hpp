#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "drate/dataset.hpp"
#include "drate/errors.hpp"

namespace drate {

enum class RegressionForm { slr, mlr, mcm };

inline const char* regression_form_name(RegressionForm f) {
  switch (f) {
    case RegressionForm::slr: return "SLR";
    case RegressionForm::mlr: return "MLR";
    case RegressionForm::mcm: return "MCM";
  }
  return "?";
}

struct ColumnLabel {
  enum class Kind { centered_treatment, covariate, modified_covariate, intercept };
  Kind kind = Kind::intercept;
  int index = 0;  // 1-based covariate index; 0 for the other kinds

  std::string str() const {
    switch (kind) {
      case Kind::centered_treatment: return "CenteredTreatment";
      case Kind::covariate: return "Covariate(" + std::to_string(index) + ")";
      case Kind::modified_covariate:
        return "ModifiedCovariate(" + std::to_string(index) + ")";
      case Kind::intercept: return "Intercept";
    }
    return "?";
  }
};

// Regressor matrix with labeled columns. Column order is fixed as
// [treatment terms..., covariates..., intercept] so the treatment-effect
// coefficient is always at index 0.
struct DesignMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> entries;  // row-major
  std::vector<ColumnLabel> column_labels;
  double p_hat = 0.0;  // empirical treated fraction used for centering

  double at(int i, int j) const {
    return entries[static_cast<std::size_t>(i) * cols + j];
  }
  double& at(int i, int j) {
    return entries[static_cast<std::size_t>(i) * cols + j];
  }
};

// Rows per form, with p the empirical treated fraction:
//   SLR: [t_i - p, 1]
//   MLR: [t_i - p, x_i..., 1]
//   MCM: [(t_i - p) * x_i..., 1]
inline DesignMatrix build_design_matrix(const Dataset& ds, RegressionForm form) {
  validate_dataset(ds);
  const int treated = ds.treated_count();
  const double p = static_cast<double>(treated) / ds.n;

  if (form == RegressionForm::slr || form == RegressionForm::mlr) {
    if (treated == 0 || treated == ds.n)
      raise(errc::all_treated_or_none_treated,
            std::string(regression_form_name(form)) +
                " needs both treated and untreated samples (treated fraction " +
                std::to_string(p) + ")");
  }
  if (form == RegressionForm::mcm && ds.d == 0)
    raise(errc::dimension_mismatch, "MCM requires at least one covariate");

  int q = 0;
  switch (form) {
    case RegressionForm::slr: q = 2; break;
    case RegressionForm::mlr: q = ds.d + 2; break;
    case RegressionForm::mcm: q = ds.d + 1; break;
  }
  if (ds.n < q)
    raise(errc::dimension_overflow,
          "design has " + std::to_string(q) + " columns but only " +
              std::to_string(ds.n) + " rows");

  DesignMatrix w;
  w.rows = ds.n;
  w.cols = q;
  w.p_hat = p;
  w.entries.resize(static_cast<std::size_t>(ds.n) * q);

  switch (form) {
    case RegressionForm::slr:
      w.column_labels = {{ColumnLabel::Kind::centered_treatment, 0},
                         {ColumnLabel::Kind::intercept, 0}};
      for (int i = 0; i < ds.n; ++i) {
        w.at(i, 0) = ds.t[i] - p;
        w.at(i, 1) = 1.0;
      }
      break;
    case RegressionForm::mlr:
      w.column_labels.push_back({ColumnLabel::Kind::centered_treatment, 0});
      for (int j = 1; j <= ds.d; ++j)
        w.column_labels.push_back({ColumnLabel::Kind::covariate, j});
      w.column_labels.push_back({ColumnLabel::Kind::intercept, 0});
      for (int i = 0; i < ds.n; ++i) {
        w.at(i, 0) = ds.t[i] - p;
        for (int j = 0; j < ds.d; ++j) w.at(i, 1 + j) = ds.x_at(i, j);
        w.at(i, ds.d + 1) = 1.0;
      }
      break;
    case RegressionForm::mcm:
      for (int j = 1; j <= ds.d; ++j)
        w.column_labels.push_back({ColumnLabel::Kind::modified_covariate, j});
      w.column_labels.push_back({ColumnLabel::Kind::intercept, 0});
      for (int i = 0; i < ds.n; ++i) {
        const double z = ds.t[i] - p;
        for (int j = 0; j < ds.d; ++j) w.at(i, j) = z * ds.x_at(i, j);
        w.at(i, ds.d) = 1.0;
      }
      break;
  }
  return w;
}

}  // namespace drate
