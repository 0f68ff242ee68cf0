#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "drate/data_io.hpp"
#include "drate/estimators.hpp"
#include "drate/monte_carlo.hpp"
#include "drate/significance.hpp"
#include "drate/synthetic.hpp"
#include "drate/variance_theory.hpp"

namespace drate {

using ordered_json = nlohmann::ordered_json;

// JSON never carries IEEE specials; map them to strings.
inline ordered_json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline ordered_json to_json(const AteEstimate& est) {
  ordered_json j;
  j["method"] = estimator_name(est.method);
  j["ate_hat"] = json_number(est.ate_hat);
  j["p_hat"] = est.p_hat;
  j["n"] = est.n;
  ordered_json coeffs = ordered_json::object();
  for (const auto& [name, value] : est.coefficients) coeffs[name] = json_number(value);
  j["coefficients"] = coeffs;
  j["residual_sum_squares"] = json_number(est.fit.residual_sum_squares);
  j["dof_residual"] = est.fit.dof_residual;
  j["warnings"] = est.warnings;
  return j;
}

inline ordered_json to_json(const SignificanceReport& rep) {
  ordered_json j;
  j["method"] = estimator_name(rep.method);
  j["t_statistic"] = json_number(rep.t_statistic);
  j["t_p_value"] = json_number(rep.t_p_value);
  j["f_statistic"] = json_number(rep.f_statistic);
  j["f_p_value"] = json_number(rep.f_p_value);
  j["dof_model"] = rep.dof_model;
  j["dof_residual"] = rep.dof_residual;
  j["sigma2_hat"] = json_number(rep.sigma2_hat);
  j["perfect_fit"] = rep.perfect_fit;
  return j;
}

inline ordered_json to_json(const SyntheticModelSpec& spec) {
  ordered_json j;
  j["family"] = family_token(spec.family);
  j["d"] = spec.d;
  j["alpha0"] = spec.alpha0;
  j["effect0"] = spec.effect0;
  j["baseline"] = spec.baseline;
  j["baseline_cubic"] = spec.baseline_cubic;
  j["effect_linear"] = spec.effect_linear;
  j["effect_quad"] = spec.effect_quad;
  j["effect_cross"] = spec.effect_cross;
  j["mu"] = spec.covariate_mean;
  j["p"] = spec.p;
  j["noise_sd"] = spec.noise_sd;
  return j;
}

inline ordered_json to_json(const McReport& rep) {
  ordered_json j;
  j["model"] = to_json(rep.spec);
  j["replications"] = rep.replications;
  j["master_seed"] = rep.master_seed;
  ordered_json cells = ordered_json::array();
  for (const auto& c : rep.cells) {
    ordered_json cj;
    cj["estimator"] = estimator_name(c.estimator);
    cj["n"] = c.n;
    cj["variance"] = json_number(c.empirical_variance);
    cj["bias"] = json_number(c.empirical_bias);
    cj["mean_estimate"] = json_number(c.mean_estimate);
    cj["error_variance"] = json_number(c.error_variance);
    cj["variance_se"] = json_number(c.variance_se);
    cj["failures"] = c.failure_count;
    cells.push_back(cj);
  }
  j["cells"] = cells;
  return j;
}

// CSV columns: estimator, n, p, variance, bias, failures.
inline std::string mc_report_csv(const McReport& rep) {
  std::string out = "estimator,n,p,variance,bias,failures\n";
  char buf[128];
  for (const auto& c : rep.cells) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%d\n",
                  estimator_name(c.estimator), c.n, rep.spec.p,
                  c.empirical_variance, c.empirical_bias, c.failure_count);
    out += buf;
  }
  return out;
}

inline ordered_json to_json(const std::vector<RankingRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["p"] = r.p;
    j["best"] = estimator_name(r.ranking.best);
    j["medium"] = estimator_name(r.ranking.medium);
    j["worst"] = estimator_name(r.ranking.worst);
    j["tied"] = r.ranking.tied;
    j["var_slr"] = json_number(r.var_slr);
    j["var_mlr"] = json_number(r.var_mlr);
    j["var_mcm"] = json_number(r.var_mcm);
    j["failures_slr"] = r.failures_slr;
    j["failures_mlr"] = r.failures_mlr;
    j["failures_mcm"] = r.failures_mcm;
    j["min_margin_sigmas"] = json_number(r.min_margin_sigmas);
    arr.push_back(j);
  }
  return arr;
}

inline std::string ranking_csv(const std::vector<RankingRow>& rows) {
  std::string out =
      "p,best,medium,worst,var_slr,var_mlr,var_mcm,min_margin_sigmas\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%s,%s,%.17g,%.17g,%.17g,%.17g\n",
                  r.p, estimator_name(r.ranking.best),
                  estimator_name(r.ranking.medium),
                  estimator_name(r.ranking.worst), r.var_slr, r.var_mlr,
                  r.var_mcm, r.min_margin_sigmas);
    out += buf;
  }
  return out;
}

inline ordered_json to_json(const std::vector<TheoryComparison>& comps) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : comps) {
    ordered_json j;
    j["estimator"] = estimator_name(c.estimator);
    if (c.nominal)
      j["nominal_variance"] = json_number(*c.nominal);
    else
      j["nominal_variance"] = nullptr;
    j["empirical_variance"] = json_number(c.empirical);
    if (c.relative_error)
      j["relative_error"] = json_number(*c.relative_error);
    else
      j["relative_error"] = nullptr;
    arr.push_back(j);
  }
  return arr;
}

inline ordered_json to_json(const EventDataset& ev) {
  ordered_json j;
  j["dropped_total"] = ev.dropped_total;
  ordered_json events = ordered_json::array();
  for (const auto& e : ev.events) {
    ordered_json ej;
    ej["event"] = format_hour_stamp(e.event_hour);
    ej["treated"] = e.treated;
    ej["control"] = e.control;
    ej["dropped"] = e.dropped;
    ej["dropped_users"] = e.dropped_users;
    events.push_back(ej);
  }
  j["events"] = events;
  return j;
}

}  // namespace drate
