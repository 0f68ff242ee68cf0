#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "drate/dataset.hpp"
#include "drate/errors.hpp"

namespace drate {

// ---------------------------------------------------------------------------
// Wide CSV: header row, comma separators, '.' decimals, one sample per row.

struct CsvSchema {
  std::string y_column = "y";
  std::string t_column = "t";
  // Empty means: every other column, in header order.
  std::vector<std::string> covariate_columns;
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline std::string trim_ws(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_number(const std::string& field, int line_no,
                           const std::string& column) {
  const std::string s = trim_ws(field);
  if (s.empty())
    raise(errc::parse_error,
          "empty value in column '" + column + "' at line " + std::to_string(line_no));
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    raise(errc::parse_error, "bad number '" + s + "' in column '" + column +
                                 "' at line " + std::to_string(line_no));
  return v;
}

inline std::size_t find_column(const std::vector<std::string>& header,
                               const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trim_ws(header[i]) == name) return i;
  raise(errc::missing_column, "column '" + name + "' not found in header");
}

}  // namespace detail

inline Dataset load_csv_text(const std::string& text, const CsvSchema& schema = {}) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) raise(errc::parse_error, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_line(line);

  const std::size_t y_idx = detail::find_column(header, schema.y_column);
  const std::size_t t_idx = detail::find_column(header, schema.t_column);
  std::vector<std::size_t> cov_idx;
  std::vector<std::string> cov_names;
  if (schema.covariate_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == y_idx || i == t_idx) continue;
      cov_idx.push_back(i);
      cov_names.push_back(detail::trim_ws(header[i]));
    }
  } else {
    for (const auto& name : schema.covariate_columns) {
      cov_idx.push_back(detail::find_column(header, name));
      cov_names.push_back(name);
    }
  }

  Dataset ds;
  ds.d = static_cast<int>(cov_idx.size());
  ds.column_names = cov_names;

  int line_no = 1;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim_ws(line).empty()) continue;
    const auto fields = detail::split_line(line);
    if (fields.size() != header.size())
      raise(errc::parse_error, "expected " + std::to_string(header.size()) +
                                   " fields at line " + std::to_string(line_no));
    const double y = detail::parse_number(fields[y_idx], line_no, schema.y_column);
    if (!std::isfinite(y))
      raise(errc::non_finite_value,
            "non-finite outcome at line " + std::to_string(line_no));
    const double t_raw = detail::parse_number(fields[t_idx], line_no, schema.t_column);
    if (t_raw != 0.0 && t_raw != 1.0)
      raise(errc::invalid_treatment_value,
            "treatment must be 0 or 1 at line " + std::to_string(line_no));
    ds.y.push_back(y);
    ds.t.push_back(t_raw == 1.0 ? 1 : 0);
    for (std::size_t j = 0; j < cov_idx.size(); ++j) {
      const double v = detail::parse_number(fields[cov_idx[j]], line_no, cov_names[j]);
      if (!std::isfinite(v))
        raise(errc::non_finite_value, "non-finite covariate '" + cov_names[j] +
                                          "' at line " + std::to_string(line_no));
      ds.x.push_back(v);
    }
  }
  ds.n = static_cast<int>(ds.y.size());
  validate_dataset(ds);
  return ds;
}

inline Dataset load_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_csv_text(buffer.str(), schema);
}

inline std::string dataset_to_csv(const Dataset& ds) {
  std::string out = "y,t";
  for (const auto& name : ds.column_names) out += "," + name;
  out += "\n";
  char buf[40];
  for (int i = 0; i < ds.n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%d", ds.y[i], ds.t[i]);
    out += buf;
    for (int j = 0; j < ds.d; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", ds.x_at(i, j));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(errc::io_error, "cannot write " + path);
  out << dataset_to_csv(ds);
}

// ---------------------------------------------------------------------------
// Standardization to zero mean and unit variance (1/N divisor), as the
// variance-comparison formulas assume.

struct StandardizeParams {
  std::vector<double> mean;
  std::vector<double> scale;
};

inline std::pair<Dataset, StandardizeParams> standardize_covariates(const Dataset& ds) {
  validate_dataset(ds);
  StandardizeParams params;
  params.mean.resize(ds.d);
  params.scale.resize(ds.d);
  for (int j = 0; j < ds.d; ++j) {
    double mean = 0.0;
    for (int i = 0; i < ds.n; ++i) mean += ds.x_at(i, j);
    mean /= ds.n;
    double var = 0.0;
    for (int i = 0; i < ds.n; ++i) {
      const double d = ds.x_at(i, j) - mean;
      var += d * d;
    }
    var /= ds.n;
    if (var <= 1e-12)
      raise(errc::degenerate_column,
            "covariate '" + ds.column_names[j] + "' is (nearly) constant");
    params.mean[j] = mean;
    params.scale[j] = std::sqrt(var);
  }
  Dataset out = ds;
  for (int i = 0; i < ds.n; ++i)
    for (int j = 0; j < ds.d; ++j)
      out.x[static_cast<std::size_t>(i) * ds.d + j] =
          (ds.x_at(i, j) - params.mean[j]) / params.scale[j];
  return {std::move(out), std::move(params)};
}

// ---------------------------------------------------------------------------
// Long-format records and the event-based treatment/control construction.
// Timestamps are ISO-8601 truncated to the hour and held as hours since
// the epoch.

struct LongRecord {
  std::string user_id;
  std::int64_t hour = 0;  // hours since 1970-01-01T00
  double consumption = 0.0;
  std::vector<double> covariates;
};

namespace detail {

// Days since 1970-01-01 from a civil date (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t positive_mod(std::int64_t a, std::int64_t b) {
  const std::int64_t r = a % b;
  return r < 0 ? r + b : r;
}

}  // namespace detail

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH", "YYYY-MM-DD HH:MM[:SS]" and the
// like; anything finer than the hour is truncated away.
inline std::int64_t parse_hour_stamp(const std::string& raw) {
  const std::string s = detail::trim_ws(raw);
  int y = 0, mo = 0, da = 0, h = 0;
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d%n", &y, &mo, &da, &consumed) != 3)
    raise(errc::parse_error, "bad timestamp '" + raw + "'");
  if (consumed < static_cast<int>(s.size())) {
    const char sep = s[consumed];
    if (sep != 'T' && sep != ' ')
      raise(errc::parse_error, "bad timestamp separator in '" + raw + "'");
    if (std::sscanf(s.c_str() + consumed + 1, "%d", &h) != 1)
      raise(errc::parse_error, "bad hour in timestamp '" + raw + "'");
  }
  if (mo < 1 || mo > 12 || da < 1 || da > 31 || h < 0 || h > 23)
    raise(errc::parse_error, "timestamp out of range: '" + raw + "'");
  return detail::days_from_civil(y, mo, da) * 24 + h;
}

inline std::string format_hour_stamp(std::int64_t hour) {
  const std::int64_t day = detail::floor_div(hour, 24);
  const int h = static_cast<int>(detail::positive_mod(hour, 24));
  int y, m, d;
  detail::civil_from_days(day, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d", y, m, d, h);
  return buf;
}

// Long CSV: header "user_id,timestamp,consumption" followed by covariate
// columns.
inline std::vector<LongRecord> load_long_csv_text(const std::string& text,
                                                  std::vector<std::string>* covariate_names = nullptr) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) raise(errc::parse_error, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_line(line);
  const std::size_t uid_idx = detail::find_column(header, "user_id");
  const std::size_t ts_idx = detail::find_column(header, "timestamp");
  const std::size_t cons_idx = detail::find_column(header, "consumption");
  std::vector<std::size_t> cov_idx;
  std::vector<std::string> cov_names;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == uid_idx || i == ts_idx || i == cons_idx) continue;
    cov_idx.push_back(i);
    cov_names.push_back(detail::trim_ws(header[i]));
  }
  if (covariate_names) *covariate_names = cov_names;

  std::vector<LongRecord> records;
  int line_no = 1;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim_ws(line).empty()) continue;
    const auto fields = detail::split_line(line);
    if (fields.size() != header.size())
      raise(errc::parse_error, "expected " + std::to_string(header.size()) +
                                   " fields at line " + std::to_string(line_no));
    LongRecord rec;
    rec.user_id = detail::trim_ws(fields[uid_idx]);
    rec.hour = parse_hour_stamp(fields[ts_idx]);
    rec.consumption = detail::parse_number(fields[cons_idx], line_no, "consumption");
    if (!std::isfinite(rec.consumption))
      raise(errc::non_finite_value,
            "non-finite consumption at line " + std::to_string(line_no));
    for (std::size_t j = 0; j < cov_idx.size(); ++j) {
      const double v = detail::parse_number(fields[cov_idx[j]], line_no, cov_names[j]);
      if (!std::isfinite(v))
        raise(errc::non_finite_value, "non-finite covariate '" + cov_names[j] +
                                          "' at line " + std::to_string(line_no));
      rec.covariates.push_back(v);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<LongRecord> load_long_csv(const std::string& path,
                                             std::vector<std::string>* covariate_names = nullptr) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_long_csv_text(buffer.str(), covariate_names);
}

struct EventGroupStat {
  std::int64_t event_hour = 0;
  int treated = 0;
  int control = 0;
  int dropped = 0;
  std::vector<std::string> dropped_users;
};

struct EventDataset {
  Dataset dataset;
  std::vector<EventGroupStat> events;
  int dropped_total = 0;
};

// Event-based group construction. For each event hour, users with a record
// exactly at that hour form the treatment group with that record; every
// other user joins the control group with their record at the same
// hour-of-day on the nearest other date (ties resolved toward the earlier
// date, so no post-event information is preferred). Users with no
// same-hour record at all are dropped and counted. Each (user, event) pair
// is an independent sample.
inline EventDataset build_event_dataset(const std::vector<LongRecord>& records,
                                        const std::vector<std::int64_t>& event_hours,
                                        std::vector<std::string> covariate_names = {}) {
  if (records.empty() || event_hours.empty())
    raise(errc::no_eligible_records, "need both records and events");

  const int d = static_cast<int>(records.front().covariates.size());
  for (const auto& rec : records)
    if (static_cast<int>(rec.covariates.size()) != d)
      raise(errc::dimension_mismatch,
            "record for user '" + rec.user_id + "' has inconsistent covariates");

  std::map<std::string, std::vector<const LongRecord*>> by_user;
  for (const auto& rec : records) by_user[rec.user_id].push_back(&rec);

  EventDataset out;
  Dataset& ds = out.dataset;
  ds.d = d;
  if (covariate_names.empty())
    for (int j = 1; j <= d; ++j) covariate_names.push_back("x" + std::to_string(j));
  ds.column_names = std::move(covariate_names);

  for (std::int64_t event : event_hours) {
    const std::int64_t event_day = detail::floor_div(event, 24);
    const std::int64_t hour_of_day = detail::positive_mod(event, 24);
    EventGroupStat stat;
    stat.event_hour = event;
    for (const auto& [user, recs] : by_user) {
      const LongRecord* exact = nullptr;
      const LongRecord* nearest = nullptr;
      std::int64_t nearest_gap = 0;
      for (const LongRecord* rec : recs) {
        if (rec->hour == event) {
          if (!exact) exact = rec;
          continue;
        }
        if (detail::positive_mod(rec->hour, 24) != hour_of_day) continue;
        const std::int64_t day = detail::floor_div(rec->hour, 24);
        const std::int64_t gap = std::llabs(day - event_day);
        const bool better =
            !nearest || gap < nearest_gap ||
            (gap == nearest_gap && rec->hour < nearest->hour);
        if (better) {
          nearest = rec;
          nearest_gap = gap;
        }
      }
      const LongRecord* chosen = exact ? exact : nearest;
      if (!chosen) {
        ++stat.dropped;
        stat.dropped_users.push_back(user);
        continue;
      }
      ds.y.push_back(chosen->consumption);
      ds.t.push_back(exact ? 1 : 0);
      for (double v : chosen->covariates) ds.x.push_back(v);
      if (exact)
        ++stat.treated;
      else
        ++stat.control;
    }
    out.dropped_total += stat.dropped;
    out.events.push_back(std::move(stat));
  }

  ds.n = static_cast<int>(ds.y.size());
  int treated = 0;
  for (int v : ds.t) treated += v;
  if (ds.n == 0) raise(errc::no_eligible_records, "no user matched any event");
  if (treated == 0 || treated == ds.n)
    raise(errc::empty_group, treated == 0 ? "treatment group is empty"
                                          : "control group is empty");
  validate_dataset(ds);
  return out;
}

}  // namespace drate
