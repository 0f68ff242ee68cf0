// Acceptance suite: exercises every headline requirement end to end and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.
//
// argv[1]: path to the dr-ate CLI binary (used by the determinism check).

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "drate/drate.hpp"
#include "support/oracles.hpp"

#ifndef DRATE_FIXTURE_DIR
#define DRATE_FIXTURE_DIR "tests/fixtures"
#endif

using namespace drate;

namespace {

int g_failures = 0;

void report(int id, const std::string& what, bool pass, const std::string& detail = "") {
  std::printf("[%s] %d. %s%s%s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              detail.empty() ? "" : " | ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

McReport run_mc(SyntheticModelSpec spec, double p, int n, int reps,
                std::uint64_t seed) {
  spec.p = p;
  McConfig config;
  config.spec = spec;
  config.n_values = {n};
  config.replications = reps;
  config.master_seed = seed;
  config.keep_estimates = true;
  return run_monte_carlo(config, 1);
}

// Margin of var(b) - var(a) in paired Monte Carlo standard errors.
double margin_sigmas(const McReport& rep, EstimatorKind a, EstimatorKind b, int n) {
  const auto& ca = rep.cell(a, n);
  const auto& cb = rep.cell(b, n);
  return detail::paired_variance_gap_sigmas(ca.estimates, cb.estimates,
                                            ca.empirical_variance,
                                            cb.empirical_variance);
}

std::string row_string(const EstimatorRanking& r) {
  return std::string(estimator_name(r.best)) + "/" + estimator_name(r.medium) +
         "/" + estimator_name(r.worst);
}

// ---------------------------------------------------------------------------

void criterion1() {
  rng::SplitMix64 g(11);
  bool pass = true;
  std::string detail;
  for (int rep = 0; rep < 100 && pass; ++rep) {
    MomentSummary m;
    m.var_x = 1.0;
    m.cov_gx = 0.0;
    m.cov_fx = 3.0 * rng::normal(g);
    m.var_f = m.cov_fx * m.cov_fx + 1.0;
    m.var_g = 1.0;
    const double p = 0.01 + 0.98 * rng::uniform01(g);
    const auto r = delta(m, p);
    const double square = m.cov_fx * m.cov_fx;
    if (r.delta < -1e-9 || std::fabs(r.delta - square) > 1e-9 * (1.0 + square)) {
      pass = false;
      detail = fmt("cov_gx=0 case broke at p=%.3f", p);
    }
  }
  for (int rep = 0; rep < 100 && pass; ++rep) {
    MomentSummary m;
    m.var_x = 1.0;
    m.cov_gx = 3.0 * rng::normal(g);
    m.cov_fx = 3.0 * rng::normal(g);
    m.var_f = m.cov_fx * m.cov_fx + 1.0;
    m.var_g = m.cov_gx * m.cov_gx + 1.0;
    const auto r = delta(m, 0.5);
    const double square = (0.5 * m.cov_gx + m.cov_fx) * (0.5 * m.cov_gx + m.cov_fx);
    if (r.delta < -1e-9 || std::fabs(r.delta - square) > 1e-9 * (1.0 + square)) {
      pass = false;
      detail = "p=0.5 perfect-square identity broke";
    }
  }
  report(1, "variance gap is a perfect square when cov(g,x)=0 or p=1/2", pass, detail);
}

void criterion2() {
  MomentSummary m;
  m.var_x = 1.0;
  m.cov_fx = 6.0;
  m.cov_gx = 20.0;
  m.var_f = 36.0;
  m.var_g = 400.0;
  m.cov_gf = 120.0;
  const auto r = delta(m, 0.5);
  const bool have = r.roots.has_value();
  const double root = have ? (*r.roots)[1] : 0.0;
  const bool pass = have && std::fabs(root - 2.3 / 3.0) <= 1e-9 &&
                    std::fabs(root - 0.77) <= 0.005;
  report(2, "k=0.3 crossover sits at 2.3/3 (0.77 to two digits)", pass,
         fmt("root=%.10f", root));
}

void criterion3() {
  const int n = 1000, reps = 10000;

  const auto rep_a = run_mc(make_model_spec(ModelFamily::m14a), 0.9, n, reps, 101);
  const double a_sm = margin_sigmas(rep_a, EstimatorKind::slr, EstimatorKind::mlr, n);
  const double a_sc = margin_sigmas(rep_a, EstimatorKind::slr, EstimatorKind::mcm, n);
  const bool pass_a = a_sm > 3.0 && a_sc > 3.0;

  const auto rep_b = run_mc(make_model_spec(ModelFamily::m14b), 0.25, n, reps, 102);
  const double b_cs = margin_sigmas(rep_b, EstimatorKind::mcm, EstimatorKind::slr, n);
  const double b_cm = margin_sigmas(rep_b, EstimatorKind::mcm, EstimatorKind::mlr, n);
  const bool pass_b = b_cs > 3.0 && b_cm > 3.0;

  report(3, "benchmark orderings: SLR best at p=0.9, MCM best at p=0.25", pass_a && pass_b,
         fmt("margins: linear-baseline %.1f/%.1f sigma, constant-baseline %.1f/%.1f sigma",
             a_sm, a_sc, b_cs, b_cm));
}

void criterion4() {
  const int n = 2000, reps = 10000;
  const auto spec = make_model_spec(ModelFamily::m14b);
  bool pass = true;
  std::string detail;
  double mcm_ratio_sum = 0.0;
  for (double p : {0.2, 0.5, 0.8}) {
    const auto comps = theory_vs_empirical(spec, p, n, reps, 103);
    double slr_emp = 0.0, mlr_emp = 0.0;
    for (const auto& c : comps) {
      if (c.estimator == EstimatorKind::slr) {
        slr_emp = c.empirical;
        if (!c.relative_error || *c.relative_error > 0.2) pass = false;
        detail += fmt("p=%.1f SLR rel %.3f; ", p, c.relative_error ? *c.relative_error : -1.0);
      }
      if (c.estimator == EstimatorKind::mcm) {
        if (!c.relative_error || *c.relative_error > 0.2) pass = false;
        detail += fmt("MCM rel %.3f; ", c.relative_error ? *c.relative_error : -1.0);
        if (c.nominal && *c.nominal > 0) mcm_ratio_sum += c.empirical / *c.nominal;
      }
      if (c.estimator == EstimatorKind::mlr) mlr_emp = c.empirical;
    }
    if (p == 0.5) {
      if (!(mlr_emp < 0.1 * slr_emp)) pass = false;
      detail += fmt("MLR/SLR at p=0.5: %.4f; ", mlr_emp / slr_emp);
    }
  }
  report(4, "closed-form variances match simulation for the constant-baseline model",
         pass, detail);
  if (!pass) {
    // The MCM gap is structural, not Monte Carlo noise: the closed form is
    // derived for centering on the design probability, while the estimator
    // centers on the realized treated fraction. That turns the key noise
    // sum into a simple-random-sampling statistic whose variance uses the
    // centered second moment of x(x - xbar): (2 + mu^2) in place of
    // (3 + mu^2), i.e. a flat empirical/nominal ratio of 3/4 at mu = 1.
    std::printf("        note: mean MCM empirical/nominal = %.4f; "
                "(2+mu^2)/(3+mu^2) = 0.75 at mu=1\n",
                mcm_ratio_sum / 3.0);
  }
}

void criterion5() {
  const int n = 1000, reps = 10000;
  const auto spec = make_model_spec(ModelFamily::m28);
  const EstimatorKind expected_best[3] = {EstimatorKind::mcm, EstimatorKind::mlr,
                                          EstimatorKind::slr};
  const EstimatorRanking reference[3] = {
      {EstimatorKind::mcm, EstimatorKind::mlr, EstimatorKind::slr, false},
      {EstimatorKind::mlr, EstimatorKind::slr, EstimatorKind::mcm, false},
      {EstimatorKind::slr, EstimatorKind::mlr, EstimatorKind::mcm, false}};
  const double ps[3] = {0.1, 0.5, 0.9};

  bool pass = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const auto rep = run_mc(spec, ps[i], n, reps, 104);
    const auto& cs = rep.cell(EstimatorKind::slr, n);
    const auto& cm = rep.cell(EstimatorKind::mlr, n);
    const auto& cc = rep.cell(EstimatorKind::mcm, n);
    const auto rank = rank_estimators(cs.empirical_variance, cm.empirical_variance,
                                      cc.empirical_variance);
    const double best_margin = margin_sigmas(rep, rank.best, rank.medium, n);
    const double mid_margin = margin_sigmas(rep, rank.medium, rank.worst, n);
    if (rank.best != expected_best[i] || best_margin < 3.0) pass = false;
    detail += fmt("p=%.1f -> %s (margins %.1f/%.1f)", ps[i], row_string(rank).c_str(),
                  best_margin, mid_margin);
    if (rank.medium != reference[i].medium || rank.worst != reference[i].worst) {
      detail += fmt(" [diverges from reference %s]", row_string(reference[i]).c_str());
    }
    detail += "; ";
  }
  report(5, "ranking-table rows for the nonlinear benchmark (best per row, margins reported)",
         pass, detail);
}

void criterion6() {
  const int n = 1000, reps = 10000;

  // (a) nonlinear baseline, constant effect, p = 1/2: adding covariates helps.
  SyntheticModelSpec a;
  a.family = ModelFamily::m29d;
  a.d = 3;
  a.baseline_cubic = {1.0, 1.0, 1.0};
  a.effect_linear = {0.0, 0.0, 0.0};
  a.effect0 = 10.0;
  a.covariate_mean = {1.0, 1.0, 1.0};
  const auto rep_a = run_mc(a, 0.5, n, reps, 105);
  const double a_margin = margin_sigmas(rep_a, EstimatorKind::mlr, EstimatorKind::slr, n);
  const bool pass_a = a_margin >= 2.0;

  // (b) nonlinear baseline, effect negatively tied to the covariates,
  // sparse treatment: the naive covariate regression is the worst choice
  // and MCM tracks SLR.
  SyntheticModelSpec b = a;
  b.effect_linear = {-1.0, -1.0, -1.0};
  b.effect0 = 0.0;
  const auto rep_b = run_mc(b, 0.15, n, reps, 106);
  const double b_margin = margin_sigmas(rep_b, EstimatorKind::slr, EstimatorKind::mlr, n);
  const double var_slr = rep_b.cell(EstimatorKind::slr, n).empirical_variance;
  const double var_mcm = rep_b.cell(EstimatorKind::mcm, n).empirical_variance;
  const bool pass_b = b_margin >= 2.0 && var_mcm <= 1.05 * var_slr;

  report(6, "building-data analogs: MLR wins under a constant effect, loses under sparse signals",
         pass_a && pass_b,
         fmt("(a) MLR<SLR margin %.1f sigma; (b) SLR<MLR margin %.1f sigma, MCM/SLR %.3f",
             a_margin, b_margin, var_mcm / var_slr));
}

void criterion7() {
  bool pass = true;
  std::string detail;

  // F = t^2 on every single-regressor fit.
  double worst_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 200 && pass; ++seed) {
    rng::SplitMix64 g(rng::combine(9000, seed));
    const int n = 12 + static_cast<int>(g.next() % 30);
    std::vector<double> y(n), x(n);
    std::vector<int> t(n);
    int treated = 0;
    for (int i = 0; i < n; ++i) {
      t[i] = rng::bernoulli(g, 0.5);
      treated += t[i];
      x[i] = 1.0 + rng::normal(g);
      y[i] = rng::normal(g) + 0.5 * t[i] + 0.3 * x[i];
    }
    if (treated == 0 || treated == n) t[0] = 1 - t[0];
    const auto ds = make_dataset(y, t, x, 1);
    for (auto method : {EstimatorKind::slr, EstimatorKind::mcm}) {
      const auto r = significance_report(ds, method);
      const double gap = std::fabs(r.f_statistic - r.t_statistic * r.t_statistic);
      const double pgap = std::fabs(r.f_p_value - r.t_p_value);
      worst_gap = std::max(worst_gap, std::max(gap, pgap));
      if (gap > 1e-9 || pgap > 1e-9) pass = false;
    }
  }
  detail += fmt("F=t^2 worst gap %.2e; ", worst_gap);

  // Fixture p-values against the density-quadrature oracle.
  const auto ds = load_csv(std::string(DRATE_FIXTURE_DIR) + "/fixture8.csv");
  double worst_oracle = 0.0;
  for (auto method : {EstimatorKind::slr, EstimatorKind::mlr, EstimatorKind::mcm}) {
    const auto r = significance_report(ds, method);
    const double t_ref = oracles::t_pvalue_quadrature(r.t_statistic, r.dof_residual);
    const double f_ref =
        oracles::f_pvalue_quadrature(r.f_statistic, r.dof_model, r.dof_residual);
    worst_oracle = std::max(worst_oracle, std::fabs(r.t_p_value - t_ref));
    worst_oracle = std::max(worst_oracle, std::fabs(r.f_p_value - f_ref));
  }
  if (worst_oracle > 1e-6) pass = false;
  detail += fmt("oracle gap %.2e; ", worst_oracle);

  // Null uniformity of the t p-value.
  std::vector<double> pvals;
  pvals.reserve(2000);
  for (int r = 0; r < 2000; ++r) {
    rng::SplitMix64 g(rng::combine(424243, r));
    const int n = 40;
    std::vector<double> y(n), x(n);
    std::vector<int> t(n);
    int treated = 0;
    for (int i = 0; i < n; ++i) {
      t[i] = rng::bernoulli(g, 0.4);
      treated += t[i];
      x[i] = rng::normal(g);
      y[i] = rng::normal(g);
    }
    if (treated == 0 || treated == n) t[0] = 1 - t[0];
    pvals.push_back(
        significance_report(make_dataset(y, t, x, 1), EstimatorKind::mlr).t_p_value);
  }
  const double ks = oracles::ks_uniform(pvals);
  if (ks > 0.05) pass = false;
  detail += fmt("null KS %.4f", ks);

  report(7, "significance machinery: F=t^2, quadrature agreement, null uniformity",
         pass, detail);
}

void criterion8() {
  rng::SplitMix64 g(808);
  bool pass = true;
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const int cols = 1 + static_cast<int>(g.next() % 4);
    const int rows = cols + 1 + static_cast<int>(g.next() % 40);
    std::vector<double> entries(static_cast<std::size_t>(rows) * cols);
    std::vector<double> y(rows);
    for (auto& e : entries) e = rng::normal(g);
    for (auto& v : y) v = 3.0 * rng::normal(g);
    DesignMatrix w;
    w.rows = rows;
    w.cols = cols;
    w.entries = entries;
    for (int j = 0; j < cols; ++j)
      w.column_labels.push_back({ColumnLabel::Kind::covariate, j + 1});
    const auto fit = solve_least_squares(w, y);
    const auto ref = oracles::normal_equation_solve(entries, rows, cols, y);
    double scale = 0.0;
    for (double b : ref) scale = std::max(scale, std::fabs(b));
    for (int j = 0; j < cols; ++j) {
      const double rel = std::fabs(fit.beta_hat[j] - ref[j]) / (scale + 1e-30);
      worst = std::max(worst, rel);
      if (rel > 1e-8) pass = false;
    }
  }
  report(8, "QR solver matches the dense normal-equation oracle on 500 systems",
         pass, fmt("worst relative gap %.2e", worst));
}

void criterion9(const char* cli_path) {
  if (!cli_path) {
    report(9, "simulate output is byte-identical across worker counts", false,
           "CLI path not supplied");
    return;
  }
  auto run = [&](int workers, const std::string& out) {
    const std::string cmd = std::string(cli_path) +
                            " simulate --family 14b --n 250,500 --reps 2000 --seed 11"
                            " --workers " +
                            std::to_string(workers) + " --output " + out;
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const std::string out1 = "/tmp/drate_accept_w1.json";
  const std::string out8 = "/tmp/drate_accept_w8.json";
  bool pass = run(1, out1) && run(8, out8);
  std::string detail;
  if (pass) {
    std::ifstream f1(out1), f8(out8);
    std::stringstream b1, b8;
    b1 << f1.rdbuf();
    b8 << f8.rdbuf();
    pass = !b1.str().empty() && b1.str() == b8.str();
    detail = fmt("%zu bytes compared", b1.str().size());
  } else {
    detail = "CLI invocation failed";
  }
  std::remove(out1.c_str());
  std::remove(out8.c_str());
  report(9, "simulate output is byte-identical across worker counts", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9(argc > 1 ? argv[1] : nullptr);
  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
