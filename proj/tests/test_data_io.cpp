#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "drate/data_io.hpp"
#include "support/helpers.hpp"

#ifndef DRATE_FIXTURE_DIR
#define DRATE_FIXTURE_DIR "tests/fixtures"
#endif

TEST_CASE("wide CSV parses with the default schema") {
  const auto ds = drate::load_csv_text("y,t,temp\n1.5,1,20\n2.0,0,21\n");
  CHECK(ds.n == 2);
  CHECK(ds.d == 1);
  CHECK(ds.column_names[0] == "temp");
  CHECK(ds.y[0] == 1.5);
  CHECK(ds.t[1] == 0);
  CHECK(ds.x_at(1, 0) == 21.0);
}

TEST_CASE("schema can reorder and subset covariates") {
  drate::CsvSchema schema;
  schema.y_column = "load";
  schema.t_column = "signal";
  schema.covariate_columns = {"b", "a"};
  const auto ds =
      drate::load_csv_text("a,load,signal,b\n1,10,0,2\n3,11,1,4\n", schema);
  CHECK(ds.d == 2);
  CHECK(ds.column_names[0] == "b");
  CHECK(ds.x_at(0, 0) == 2.0);
  CHECK(ds.x_at(0, 1) == 1.0);
}

TEST_CASE("CSV validation errors carry line context") {
  try {
    drate::load_csv_text("y,t\n1.0,2\n");
    FAIL("expected InvalidTreatmentValue");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::invalid_treatment_value);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  try {
    drate::load_csv_text("y,t\nNaN,1\n");
    FAIL("expected NonFiniteValue");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::non_finite_value);
  }
  try {
    drate::load_csv_text("y,t\nfoo,1\n");
    FAIL("expected ParseError");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::parse_error);
  }
  try {
    drate::load_csv_text("y,s\n1,1\n");
    FAIL("expected MissingColumn");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::missing_column);
  }
  try {
    drate::load_csv_text("y,t\n1,1,9\n");
    FAIL("expected ParseError");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::parse_error);
  }
}

TEST_CASE("CSV write/load round-trips numeric content") {
  const auto ds = helpers::random_dataset(25, 2, 4);
  const auto text = drate::dataset_to_csv(ds);
  const auto back = drate::load_csv_text(text);
  REQUIRE(back.n == ds.n);
  REQUIRE(back.d == ds.d);
  for (int i = 0; i < ds.n; ++i) {
    CHECK(back.y[i] == ds.y[i]);
    CHECK(back.t[i] == ds.t[i]);
    for (int j = 0; j < ds.d; ++j) CHECK(back.x_at(i, j) == ds.x_at(i, j));
  }
}

TEST_CASE("standardization yields zero mean and unit variance") {
  const auto ds = helpers::tiny_dataset({1, 2, 3}, {1, 0, 1}, {1, 2, 3}, 1);
  const auto [std_ds, params] = drate::standardize_covariates(ds);
  double mean = 0.0;
  for (int i = 0; i < 3; ++i) mean += std_ds.x_at(i, 0);
  mean /= 3;
  double var = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = std_ds.x_at(i, 0) - mean;
    var += d * d;
  }
  var /= 3;
  CHECK(std::fabs(mean) < 1e-12);
  CHECK(var == Catch::Approx(1.0).margin(1e-12));
  CHECK(params.mean[0] == Catch::Approx(2.0));
  CHECK(params.scale[0] == Catch::Approx(std::sqrt(2.0 / 3.0)));

  // Idempotence.
  const auto [again, params2] = drate::standardize_covariates(std_ds);
  for (int i = 0; i < 3; ++i)
    CHECK(again.x_at(i, 0) == Catch::Approx(std_ds.x_at(i, 0)).margin(1e-12));
}

TEST_CASE("constant covariates cannot be standardized") {
  const auto ds = helpers::tiny_dataset({1, 2, 3}, {1, 0, 1}, {5, 5, 5}, 1);
  try {
    drate::standardize_covariates(ds);
    FAIL("expected DegenerateColumn");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::degenerate_column);
  }
}

TEST_CASE("hour stamps parse and format") {
  CHECK(drate::parse_hour_stamp("1970-01-01T00") == 0);
  CHECK(drate::parse_hour_stamp("1970-01-02T01") == 25);
  CHECK(drate::parse_hour_stamp("2013-07-05 14:30:59") ==
        drate::parse_hour_stamp("2013-07-05T14"));
  CHECK(drate::format_hour_stamp(drate::parse_hour_stamp("2013-07-05T14")) ==
        "2013-07-05T14");
  CHECK(drate::parse_hour_stamp("1969-12-31T23") == -1);
  try {
    drate::parse_hour_stamp("not-a-date");
    FAIL("expected ParseError");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::parse_error);
  }
}

TEST_CASE("event matching follows the nearest-date rule") {
  std::vector<std::string> names;
  const auto records =
      drate::load_long_csv(std::string(DRATE_FIXTURE_DIR) + "/events_long.csv", &names);
  REQUIRE(records.size() == 8);
  REQUIRE(names == std::vector<std::string>{"temp"});

  const auto event = drate::parse_hour_stamp("2013-07-05T14");
  const auto result = drate::build_event_dataset(records, {event}, names);
  const auto& ds = result.dataset;

  // alice and dave have records at the event hour -> treated; bob matches
  // his 1-day-after record (nearer than 2 days before); carol has no
  // same-hour record and is dropped.
  REQUIRE(ds.n == 3);
  REQUIRE(result.events.size() == 1);
  CHECK(result.events[0].treated == 2);
  CHECK(result.events[0].control == 1);
  CHECK(result.events[0].dropped == 1);
  CHECK(result.events[0].dropped_users ==
        std::vector<std::string>{"carol"});
  CHECK(result.dropped_total == 1);

  // Users iterate in sorted order: alice (t), bob (c), dave (t).
  CHECK(ds.t == std::vector<int>{1, 0, 1});
  CHECK(ds.y[0] == 3.2);
  CHECK(ds.y[1] == 1.8);
  CHECK(ds.y[2] == 4.1);
}

TEST_CASE("equidistant candidates resolve to the earlier date") {
  std::vector<drate::LongRecord> records;
  const auto event = drate::parse_hour_stamp("2020-05-10T08");
  records.push_back({"u1", event, 1.0, {}});
  records.push_back({"u2", drate::parse_hour_stamp("2020-05-09T08"), 2.0, {}});
  records.push_back({"u2", drate::parse_hour_stamp("2020-05-11T08"), 3.0, {}});
  const auto result = drate::build_event_dataset(records, {event});
  REQUIRE(result.dataset.n == 2);
  CHECK(result.dataset.y[1] == 2.0);  // the earlier of the two candidates
}

TEST_CASE("each event contributes its own samples") {
  std::vector<drate::LongRecord> records;
  const auto e1 = drate::parse_hour_stamp("2020-05-10T08");
  const auto e2 = drate::parse_hour_stamp("2020-05-12T08");
  records.push_back({"u1", e1, 1.0, {}});
  records.push_back({"u1", e2, 1.5, {}});
  records.push_back({"u2", drate::parse_hour_stamp("2020-05-11T08"), 2.0, {}});
  const auto result = drate::build_event_dataset(records, {e1, e2});
  CHECK(result.dataset.n == 4);  // (u1, u2) for each of two events
  int treated = 0;
  for (int v : result.dataset.t) treated += v;
  CHECK(treated == 2);
}

TEST_CASE("event matching failure modes") {
  try {
    drate::build_event_dataset({}, {0});
    FAIL("expected NoEligibleRecords");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::no_eligible_records);
  }
  // Only exact-hour records: control group stays empty.
  std::vector<drate::LongRecord> records;
  const auto event = drate::parse_hour_stamp("2020-05-10T08");
  records.push_back({"u1", event, 1.0, {}});
  records.push_back({"u2", event, 2.0, {}});
  try {
    drate::build_event_dataset(records, {event});
    FAIL("expected EmptyGroup");
  } catch (const drate::error& e) {
    CHECK(e.code() == drate::errc::empty_group);
  }
}
