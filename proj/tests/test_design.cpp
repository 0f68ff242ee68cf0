#include <catch2/catch_amalgamated.hpp>

#include "drate/design.hpp"
#include "support/helpers.hpp"

using drate::ColumnLabel;
using drate::RegressionForm;

TEST_CASE("SLR design centers the treatment column") {
  const auto ds = helpers::tiny_dataset({1.0, 2.0}, {1, 0}, {}, 0);
  const auto w = drate::build_design_matrix(ds, RegressionForm::slr);
  REQUIRE(w.rows == 2);
  REQUIRE(w.cols == 2);
  REQUIRE(w.p_hat == 0.5);
  CHECK(w.at(0, 0) == 0.5);
  CHECK(w.at(0, 1) == 1.0);
  CHECK(w.at(1, 0) == -0.5);
  CHECK(w.at(1, 1) == 1.0);
  CHECK(w.column_labels[0].str() == "CenteredTreatment");
  CHECK(w.column_labels[1].str() == "Intercept");
}

TEST_CASE("MCM design multiplies the centered treatment into the covariates") {
  // t = [1,0,0,0], x = [2,3,4,5], p = 0.25 -> (t - p) x = [1.5, -0.75, -1, -1.25]
  const auto ds = helpers::tiny_dataset({0, 0, 0, 0}, {1, 0, 0, 0}, {2, 3, 4, 5}, 1);
  const auto w = drate::build_design_matrix(ds, RegressionForm::mcm);
  REQUIRE(w.cols == 2);
  CHECK(w.p_hat == 0.25);
  CHECK(w.at(0, 0) == Catch::Approx(1.5).margin(1e-15));
  CHECK(w.at(1, 0) == Catch::Approx(-0.75).margin(1e-15));
  CHECK(w.at(2, 0) == Catch::Approx(-1.0).margin(1e-15));
  CHECK(w.at(3, 0) == Catch::Approx(-1.25).margin(1e-15));
  CHECK(w.column_labels[0].str() == "ModifiedCovariate(1)");
  CHECK(w.column_labels[1].str() == "Intercept");
}

TEST_CASE("MLR design shape and labels for d = 2") {
  const int n = 10;
  std::vector<double> y(n, 1.0), x;
  std::vector<int> t(n, 0);
  t[0] = t[1] = 1;
  for (int i = 0; i < n; ++i) {
    x.push_back(i);
    x.push_back(2.0 * i);
  }
  const auto ds = helpers::tiny_dataset(y, t, x, 2);
  const auto w = drate::build_design_matrix(ds, RegressionForm::mlr);
  REQUIRE(w.rows == 10);
  REQUIRE(w.cols == 4);
  CHECK(w.column_labels[0].str() == "CenteredTreatment");
  CHECK(w.column_labels[1].str() == "Covariate(1)");
  CHECK(w.column_labels[2].str() == "Covariate(2)");
  CHECK(w.column_labels[3].str() == "Intercept");
  // Exactly one intercept column.
  int intercepts = 0;
  for (const auto& label : w.column_labels)
    if (label.kind == ColumnLabel::Kind::intercept) ++intercepts;
  CHECK(intercepts == 1);
}

TEST_CASE("constant treatment is rejected for SLR and MLR") {
  const auto ds = helpers::tiny_dataset({1, 2, 3}, {1, 1, 1}, {1, 2, 3}, 1);
  for (auto form : {RegressionForm::slr, RegressionForm::mlr}) {
    try {
      drate::build_design_matrix(ds, form);
      FAIL("expected AllTreatedOrNoneTreated");
    } catch (const drate::error& e) {
      CHECK(e.code() == drate::errc::all_treated_or_none_treated);
    }
  }
}

TEST_CASE("more columns than rows is rejected") {
  // d = 2 with n = 3 < d + 2.
  const auto ds = helpers::tiny_dataset({1, 2, 3}, {1, 0, 1}, {1, 2, 3, 4, 5, 6}, 2);
  try {
    drate::build_design_matrix(ds, RegressionForm::mlr);
    FAIL("expected DimensionOverflow");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::dimension_overflow);
  }
}

TEST_CASE("non-finite data is rejected at dataset construction") {
  try {
    helpers::tiny_dataset({1.0, std::nan("")}, {1, 0}, {}, 0);
    FAIL("expected NonFiniteValue");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::non_finite_value);
  }
  try {
    helpers::tiny_dataset({1.0, 2.0}, {1, 2}, {}, 0);
    FAIL("expected InvalidTreatmentValue");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::invalid_treatment_value);
  }
}
