// dr-ate: ATE estimation for demand-response data, plus the simulation and
// variance-comparison workflows around it. Subcommands:
//
//   estimate      point estimates from a CSV dataset (SLR / MLR / MCM)
//   significance  t / F tests of the fitted regressions
//   simulate      replicated synthetic experiments -> variance report
//   ranking       best/medium/worst estimator sweep over p
//   region        sign grid of the SLR-vs-MLR variance gap over (p, k)
//   theory-check  closed-form variance against simulation
//
// Exit codes: 0 success, 2 flag/config validation error, 3 data error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drate/drate.hpp"

namespace {

using drate::ordered_json;

int exit_code_for(drate::errc c) {
  switch (c) {
    case drate::errc::invalid_argument:
    case drate::errc::unknown_family:
    case drate::errc::p_out_of_range:
    case drate::errc::regime_mismatch:
    case drate::errc::domain_error:
    case drate::errc::dimension_mismatch:
    case drate::errc::length_mismatch:
      return 2;
    default:
      return 3;
  }
}

void emit(const std::string& text, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output_path);
  if (!out) drate::raise(drate::errc::io_error, "cannot write " + output_path);
  out << text;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json envelope(const char* command) {
  ordered_json j;
  j["schema"] = 1;
  j["command"] = command;
  return j;
}

std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed_value,
                           std::optional<std::uint64_t> config_seed) {
  if (seed_given) return seed_value;
  if (config_seed) return *config_seed;
  if (const char* env = std::getenv("DR_ATE_SEED")) {
    try {
      return static_cast<std::uint64_t>(std::stoull(env));
    } catch (const std::exception&) {
      drate::raise(drate::errc::invalid_argument,
                   std::string("DR_ATE_SEED is not an integer: '") + env + "'");
    }
  }
  return 0;
}

std::vector<drate::EstimatorKind> parse_methods(const std::vector<std::string>& tokens) {
  std::vector<drate::EstimatorKind> out;
  for (const auto& t : tokens) out.push_back(drate::parse_estimator(t));
  if (out.empty())
    drate::raise(drate::errc::invalid_argument, "no estimation method selected");
  return out;
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1) drate::raise(drate::errc::invalid_argument, "steps must be >= 1");
  if (steps == 1) return {lo};
  if (!(hi > lo)) drate::raise(drate::errc::invalid_argument, "grid needs max > min");
  std::vector<double> v(steps);
  for (int i = 0; i < steps; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
  return v;
}

// ---------------------------------------------------------------------------
// Shared input options for the data-driven commands.

struct DataInput {
  std::string input;
  std::string long_input;
  std::vector<std::string> events;
  std::string y_column = "y";
  std::string t_column = "t";
  std::vector<std::string> covariates;
  bool standardize = false;
};

void add_data_options(CLI::App* cmd, DataInput& in) {
  auto* wide = cmd->add_option("--input", in.input, "Wide CSV (y,t,covariates...)");
  auto* lng = cmd->add_option("--long-input", in.long_input,
                              "Long CSV (user_id,timestamp,consumption,covariates...)");
  auto* ev = cmd->add_option("--events", in.events,
                             "Event timestamps (ISO-8601 hours) for --long-input")
                 ->delimiter(',');
  wide->excludes(lng);
  lng->needs(ev);
  ev->needs(lng);
  cmd->add_option("--y-column", in.y_column, "Outcome column name")
      ->capture_default_str();
  cmd->add_option("--t-column", in.t_column, "Treatment column name")
      ->capture_default_str();
  cmd->add_option("--covariates", in.covariates,
                  "Covariate columns (default: all other columns)")
      ->delimiter(',');
  cmd->add_flag("--standardize", in.standardize,
                "Standardize covariates to zero mean, unit variance");
}

struct LoadedData {
  drate::Dataset dataset;
  std::optional<drate::EventDataset> event_info;
  std::optional<drate::StandardizeParams> standardize_params;
};

LoadedData load_data(const DataInput& in) {
  LoadedData out;
  if (!in.input.empty()) {
    drate::CsvSchema schema;
    schema.y_column = in.y_column;
    schema.t_column = in.t_column;
    schema.covariate_columns = in.covariates;
    out.dataset = drate::load_csv(in.input, schema);
  } else if (!in.long_input.empty()) {
    std::vector<std::string> names;
    const auto records = drate::load_long_csv(in.long_input, &names);
    std::vector<std::int64_t> hours;
    for (const auto& e : in.events) hours.push_back(drate::parse_hour_stamp(e));
    auto ev = drate::build_event_dataset(records, hours, names);
    out.dataset = ev.dataset;
    out.event_info = std::move(ev);
  } else {
    drate::raise(drate::errc::invalid_argument,
                 "one of --input or --long-input is required");
  }
  if (in.standardize) {
    auto [ds, params] = drate::standardize_covariates(out.dataset);
    out.dataset = std::move(ds);
    out.standardize_params = std::move(params);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model selection shared by simulate / ranking / theory-check.

struct ModelInput {
  std::string family;
  std::string config;
  double p = -1.0;  // <0 means: keep the model's canonical p
  bool p_given = false;
};

void add_model_options(CLI::App* cmd, ModelInput& mi) {
  auto* fam = cmd->add_option("--family", mi.family,
                              "Built-in model family (14a, 14b, 28, 29a-29d)");
  auto* cfg = cmd->add_option("--config", mi.config, "Model config file");
  fam->excludes(cfg);
  cmd->add_option("--p", mi.p, "Treatment assignment probability override");
}

drate::SyntheticModelSpec resolve_model(const ModelInput& mi,
                                        std::optional<std::uint64_t>* config_seed) {
  drate::SyntheticModelSpec spec;
  if (!mi.config.empty()) {
    spec = drate::load_spec_config(mi.config, config_seed);
  } else if (!mi.family.empty()) {
    spec = drate::make_model_spec(drate::parse_family(mi.family));
  } else {
    drate::raise(drate::errc::invalid_argument,
                 "one of --family or --config is required");
  }
  if (mi.p_given) spec.p = mi.p;
  return spec;
}

// ---------------------------------------------------------------------------
// Table renderers. p-values print in scientific notation with two
// significant digits.

std::string estimate_table(const std::vector<drate::AteEstimate>& ests) {
  std::string out = "method     ate_hat        p_hat    n\n";
  char buf[128];
  for (const auto& e : ests) {
    std::snprintf(buf, sizeof buf, "%-8s %12.6g %8.4f %8d%s\n",
                  drate::estimator_name(e.method), e.ate_hat, e.p_hat, e.n,
                  e.warnings.empty() ? "" : "   [NearZeroCovariateMean]");
    out += buf;
  }
  return out;
}

std::string significance_table(const std::vector<drate::SignificanceReport>& reps) {
  std::string out =
      "method   t_stat       t_p      f_stat       f_p      dof   sig(0.05)  sig(0.01)\n";
  char buf[160];
  for (const auto& r : reps) {
    std::snprintf(buf, sizeof buf,
                  "%-8s %8.3g  %8.1e  %8.3g  %8.1e  %5d   %-9s  %-9s\n",
                  drate::estimator_name(r.method), r.t_statistic, r.t_p_value,
                  r.f_statistic, r.f_p_value, r.dof_residual,
                  r.t_p_value < 0.05 ? "yes" : "no",
                  r.t_p_value < 0.01 ? "yes" : "no");
    out += buf;
  }
  return out;
}

std::string simulate_table(const drate::McReport& rep) {
  std::string out = "estimator      n      variance          bias   failures\n";
  char buf[160];
  for (const auto& c : rep.cells) {
    std::snprintf(buf, sizeof buf, "%-9s %6d  %12.6g  %12.6g   %8d\n",
                  drate::estimator_name(c.estimator), c.n, c.empirical_variance,
                  c.empirical_bias, c.failure_count);
    out += buf;
  }
  return out;
}

std::string ranking_table(const std::vector<drate::RankingRow>& rows) {
  std::string out = "    p   best   medium   worst       var_slr       var_mlr       var_mcm\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%5.2f   %-5s  %-6s  %-5s  %12.6g  %12.6g  %12.6g%s\n",
                  r.p, drate::estimator_name(r.ranking.best),
                  drate::estimator_name(r.ranking.medium),
                  drate::estimator_name(r.ranking.worst), r.var_slr, r.var_mlr,
                  r.var_mcm, r.ranking.tied ? "   [tied]" : "");
    out += buf;
  }
  return out;
}

std::string theory_table(const std::vector<drate::TheoryComparison>& comps) {
  std::string out = "estimator       nominal     empirical   rel_error\n";
  char buf[160];
  for (const auto& c : comps) {
    char nom[32], rel[32];
    if (c.nominal)
      std::snprintf(nom, sizeof nom, "%12.6g", *c.nominal);
    else
      std::snprintf(nom, sizeof nom, "%12s", "-");
    if (c.relative_error)
      std::snprintf(rel, sizeof rel, "%10.3g", *c.relative_error);
    else
      std::snprintf(rel, sizeof rel, "%10s", "-");
    std::snprintf(buf, sizeof buf, "%-9s  %s  %12.6g  %s\n",
                  drate::estimator_name(c.estimator), nom, c.empirical, rel);
    out += buf;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Treatment-effect estimation for demand response"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // --- estimate ------------------------------------------------------------
  auto* est_cmd = app.add_subcommand("estimate", "Estimate the ATE from a dataset");
  DataInput est_in;
  std::vector<std::string> est_methods = {"slr", "mlr", "mcm"};
  std::string est_output, est_format = "json";
  add_data_options(est_cmd, est_in);
  est_cmd->add_option("--method", est_methods, "Estimators to run (slr,mlr,mcm)")
      ->delimiter(',')
      ->capture_default_str();
  est_cmd->add_option("--output", est_output, "Write to file instead of stdout");
  est_cmd->add_option("--format", est_format, "json or table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  // --- significance ----------------------------------------------------------
  auto* sig_cmd = app.add_subcommand("significance", "t and F tests for the fits");
  DataInput sig_in;
  std::vector<std::string> sig_methods = {"slr", "mlr", "mcm"};
  std::string sig_output, sig_format = "json";
  add_data_options(sig_cmd, sig_in);
  sig_cmd->add_option("--method", sig_methods, "Estimators to test (slr,mlr,mcm)")
      ->delimiter(',')
      ->capture_default_str();
  sig_cmd->add_option("--output", sig_output, "Write to file instead of stdout");
  sig_cmd->add_option("--format", sig_format, "json or table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  // --- simulate --------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "Replicated synthetic experiments");
  ModelInput sim_model;
  std::vector<int> sim_n = {250, 500, 1000, 2000, 4000};
  int sim_reps = 10000;
  std::uint64_t sim_seed = 0;
  int sim_workers = 1;
  std::string sim_output, sim_format = "json";
  add_model_options(sim_cmd, sim_model);
  sim_cmd->add_option("--n", sim_n, "Sample sizes")->delimiter(',')->capture_default_str();
  sim_cmd->add_option("--reps", sim_reps, "Replications")->capture_default_str();
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Master seed");
  sim_cmd->add_option("--workers", sim_workers, "Worker threads")->capture_default_str();
  sim_cmd->add_option("--output", sim_output, "Write to file instead of stdout");
  sim_cmd->add_option("--format", sim_format, "json, csv or table")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();

  // --- ranking ---------------------------------------------------------------
  auto* rank_cmd = app.add_subcommand("ranking", "Estimator ordering sweep over p");
  ModelInput rank_model;
  std::vector<double> rank_p = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int rank_n = 1000;
  int rank_reps = 10000;
  std::uint64_t rank_seed = 0;
  int rank_workers = 1;
  std::string rank_output, rank_format = "json";
  add_model_options(rank_cmd, rank_model);
  rank_cmd->add_option("--p-values", rank_p, "Assignment probabilities")
      ->delimiter(',')
      ->capture_default_str();
  rank_cmd->add_option("--n", rank_n, "Sample size")->capture_default_str();
  rank_cmd->add_option("--reps", rank_reps, "Replications")->capture_default_str();
  auto* rank_seed_opt = rank_cmd->add_option("--seed", rank_seed, "Master seed");
  rank_cmd->add_option("--workers", rank_workers, "Worker threads")->capture_default_str();
  rank_cmd->add_option("--output", rank_output, "Write to file instead of stdout");
  rank_cmd->add_option("--format", rank_format, "json, csv or table")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();

  // --- region ----------------------------------------------------------------
  auto* reg_cmd = app.add_subcommand("region", "Sign grid of the variance gap");
  double reg_pmin = 0.01, reg_pmax = 0.99, reg_kmin = -2.0, reg_kmax = 2.0;
  int reg_psteps = 99, reg_ksteps = 81;
  std::string reg_output, reg_format = "csv";
  reg_cmd->add_option("--p-min", reg_pmin, "Smallest p")->capture_default_str();
  reg_cmd->add_option("--p-max", reg_pmax, "Largest p")->capture_default_str();
  reg_cmd->add_option("--p-steps", reg_psteps, "Grid points in p")->capture_default_str();
  reg_cmd->add_option("--k-min", reg_kmin, "Smallest k")->capture_default_str();
  reg_cmd->add_option("--k-max", reg_kmax, "Largest k")->capture_default_str();
  reg_cmd->add_option("--k-steps", reg_ksteps, "Grid points in k")->capture_default_str();
  reg_cmd->add_option("--output", reg_output, "Write to file instead of stdout");
  reg_cmd->add_option("--format", reg_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // --- theory-check ------------------------------------------------------------
  auto* thy_cmd = app.add_subcommand("theory-check",
                                     "Closed-form variance against simulation");
  ModelInput thy_model;
  int thy_n = 2000;
  int thy_reps = 10000;
  std::uint64_t thy_seed = 0;
  int thy_workers = 1;
  std::string thy_output, thy_format = "json";
  add_model_options(thy_cmd, thy_model);
  thy_cmd->add_option("--n", thy_n, "Sample size")->capture_default_str();
  thy_cmd->add_option("--reps", thy_reps, "Replications")->capture_default_str();
  auto* thy_seed_opt = thy_cmd->add_option("--seed", thy_seed, "Master seed");
  thy_cmd->add_option("--workers", thy_workers, "Worker threads")->capture_default_str();
  thy_cmd->add_option("--output", thy_output, "Write to file instead of stdout");
  thy_cmd->add_option("--format", thy_format, "json or table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*est_cmd) {
      const auto methods = parse_methods(est_methods);
      const auto data = load_data(est_in);
      std::vector<drate::AteEstimate> ests;
      for (auto m : methods) ests.push_back(drate::estimate(data.dataset, m));
      if (est_format == "table") {
        emit(estimate_table(ests), est_output);
      } else {
        auto j = envelope("estimate");
        ordered_json arr = ordered_json::array();
        for (const auto& e : ests) arr.push_back(drate::to_json(e));
        j["estimates"] = arr;
        if (data.event_info) j["event_matching"] = drate::to_json(*data.event_info);
        if (data.standardize_params) {
          j["standardized"] = true;
          j["standardize_mean"] = data.standardize_params->mean;
          j["standardize_scale"] = data.standardize_params->scale;
        }
        emit(dump(j), est_output);
      }
    } else if (*sig_cmd) {
      const auto methods = parse_methods(sig_methods);
      const auto data = load_data(sig_in);
      std::vector<drate::SignificanceReport> reps;
      for (auto m : methods) reps.push_back(drate::significance_report(data.dataset, m));
      if (sig_format == "table") {
        emit(significance_table(reps), sig_output);
      } else {
        auto j = envelope("significance");
        ordered_json arr = ordered_json::array();
        for (const auto& r : reps) arr.push_back(drate::to_json(r));
        j["reports"] = arr;
        if (data.event_info) j["event_matching"] = drate::to_json(*data.event_info);
        emit(dump(j), sig_output);
      }
    } else if (*sim_cmd) {
      std::optional<std::uint64_t> config_seed;
      drate::McConfig config;
      config.spec = resolve_model(
          {sim_model.family, sim_model.config, sim_model.p,
           sim_cmd->count("--p") > 0},
          &config_seed);
      config.n_values = sim_n;
      config.replications = sim_reps;
      config.master_seed = resolve_seed(sim_seed_opt->count() > 0, sim_seed, config_seed);
      const auto report = drate::run_monte_carlo(config, sim_workers);
      if (sim_format == "csv") {
        emit(drate::mc_report_csv(report), sim_output);
      } else if (sim_format == "table") {
        emit(simulate_table(report), sim_output);
      } else {
        auto j = envelope("simulate");
        j["report"] = drate::to_json(report);
        emit(dump(j), sim_output);
      }
    } else if (*rank_cmd) {
      std::optional<std::uint64_t> config_seed;
      const auto spec = resolve_model(
          {rank_model.family, rank_model.config, rank_model.p,
           rank_cmd->count("--p") > 0},
          &config_seed);
      const auto seed = resolve_seed(rank_seed_opt->count() > 0, rank_seed, config_seed);
      const auto rows = drate::ranking_sweep(spec, rank_p, rank_n, rank_reps, seed,
                                             rank_workers);
      if (rank_format == "csv") {
        emit(drate::ranking_csv(rows), rank_output);
      } else if (rank_format == "table") {
        emit(ranking_table(rows), rank_output);
      } else {
        auto j = envelope("ranking");
        j["model"] = drate::to_json(spec);
        j["n"] = rank_n;
        j["replications"] = rank_reps;
        j["master_seed"] = seed;
        j["rows"] = drate::to_json(rows);
        emit(dump(j), rank_output);
      }
    } else if (*reg_cmd) {
      const auto region = drate::delta_sign_region(
          linspace(reg_pmin, reg_pmax, reg_psteps),
          linspace(reg_kmin, reg_kmax, reg_ksteps));
      if (reg_format == "json") {
        auto j = envelope("region");
        j["p_grid"] = region.p_grid;
        j["k_grid"] = region.k_grid;
        ordered_json rows = ordered_json::array();
        for (std::size_t ki = 0; ki < region.k_grid.size(); ++ki) {
          ordered_json row = ordered_json::array();
          for (std::size_t pi = 0; pi < region.p_grid.size(); ++pi)
            row.push_back(region.at(ki, pi));
          rows.push_back(row);
        }
        j["signs"] = rows;
        emit(dump(j), reg_output);
      } else {
        emit(drate::sign_region_csv(region), reg_output);
      }
    } else if (*thy_cmd) {
      std::optional<std::uint64_t> config_seed;
      const auto spec = resolve_model(
          {thy_model.family, thy_model.config, thy_model.p,
           thy_cmd->count("--p") > 0},
          &config_seed);
      const auto seed = resolve_seed(thy_seed_opt->count() > 0, thy_seed, config_seed);
      const auto comps =
          drate::theory_vs_empirical(spec, spec.p, thy_n, thy_reps, seed, thy_workers);
      if (thy_format == "table") {
        emit(theory_table(comps), thy_output);
      } else {
        auto j = envelope("theory-check");
        j["model"] = drate::to_json(spec);
        j["n"] = thy_n;
        j["replications"] = thy_reps;
        j["master_seed"] = seed;
        j["comparisons"] = drate::to_json(comps);
        emit(dump(j), thy_output);
      }
    }
  } catch (const drate::error& e) {
    std::cerr << "dr-ate: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "dr-ate: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
