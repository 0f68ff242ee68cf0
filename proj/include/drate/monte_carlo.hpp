#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "drate/errors.hpp"
#include "drate/estimators.hpp"
#include "drate/rng.hpp"
#include "drate/synthetic.hpp"
#include "drate/variance_theory.hpp"

namespace drate {

struct McConfig {
  SyntheticModelSpec spec;
  std::vector<int> n_values;
  int replications = 10000;
  std::uint64_t master_seed = 0;
  std::vector<EstimatorKind> estimators = {EstimatorKind::slr, EstimatorKind::mlr,
                                           EstimatorKind::mcm};
  // Retain per-replication estimates/truths in the report cells (used for
  // margin diagnostics; off by default to keep reports lean).
  bool keep_estimates = false;
};

// Aggregates for one (estimator, n) pair. empirical_variance is the
// unbiased sample variance of ate_hat across successful replications;
// error_variance is the same for ate_hat - ate_true, the quantity the
// closed-form approximations describe. variance_se is the large-sample
// standard error of empirical_variance from the fourth central moment.
struct McCell {
  EstimatorKind estimator = EstimatorKind::slr;
  int n = 0;
  double empirical_variance = 0.0;
  double empirical_bias = 0.0;
  double mean_estimate = 0.0;
  double error_variance = 0.0;
  double variance_se = 0.0;
  int failure_count = 0;
  std::vector<double> estimates;  // kept when McConfig::keep_estimates
  std::vector<double> truths;
};

struct McReport {
  SyntheticModelSpec spec;
  int replications = 0;
  std::uint64_t master_seed = 0;
  std::vector<McCell> cells;  // ordered by (n, estimator) in config order

  const McCell& cell(EstimatorKind k, int n) const {
    for (const auto& c : cells)
      if (c.estimator == k && c.n == n) return c;
    raise(errc::invalid_argument, "no such report cell");
  }
};

using EstimatorFn = std::function<double(const Dataset&)>;

namespace detail {

inline void validate_mc_config(const McConfig& c) {
  validate_spec(c.spec);
  if (c.replications < 2) raise(errc::invalid_argument, "need at least 2 replications");
  if (c.n_values.empty()) raise(errc::invalid_argument, "n_values must not be empty");
  for (int n : c.n_values)
    if (n < c.spec.d + 2)
      raise(errc::invalid_argument, "each n must be >= d + 2, got " + std::to_string(n));
  if (c.estimators.empty()) raise(errc::invalid_argument, "no estimators selected");
}

inline std::uint64_t replication_seed(std::uint64_t master_seed, int r) {
  return rng::combine(rng::combine(master_seed, rng::kStreamReplication),
                      static_cast<std::uint64_t>(r));
}

// Unbiased sample variance plus the standard error of that variance,
// Var(s^2) ~= m4/R - s^4 (R-3) / (R (R-1)).
struct VarianceStats {
  double mean = 0.0;
  double variance = 0.0;
  double se_of_variance = 0.0;
};

inline VarianceStats variance_stats(const std::vector<double>& v) {
  VarianceStats out;
  const std::size_t r = v.size();
  if (r < 2) return out;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(r);
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double rn = static_cast<double>(r);
  const double s2 = m2 / (rn - 1.0);
  m2 /= rn;
  m4 /= rn;
  out.mean = mean;
  out.variance = s2;
  double var_of_var = m4 / rn - s2 * s2 * (rn - 3.0) / (rn * (rn - 1.0));
  if (var_of_var < 0.0) var_of_var = 0.0;
  out.se_of_variance = std::sqrt(var_of_var);
  return out;
}

// Run a chunk range [begin, end) of replications for one n, storing by
// replication index. Worker count never changes results because every
// slot is written independently and reduced in index order afterwards.
struct ReplicationSlot {
  double ate_true = 0.0;
  std::vector<double> estimates;   // per configured estimator
  std::vector<unsigned char> failed;
};

}  // namespace detail

// Engine core with injectable estimators (the public entry point binds the
// real ones). Each replication r draws a fresh synthetic dataset from the
// substream (master_seed, replication tag, r) and applies every estimator;
// replications where an estimator raises a drate::error are excluded from
// that estimator's aggregates and counted as failures.
inline McReport run_monte_carlo_with(
    const McConfig& config,
    const std::vector<std::pair<EstimatorKind, EstimatorFn>>& estimators,
    int workers = 1) {
  detail::validate_mc_config(config);
  if (estimators.empty()) raise(errc::invalid_argument, "no estimators supplied");
  if (workers < 1) workers = 1;

  McReport report;
  report.spec = config.spec;
  report.replications = config.replications;
  report.master_seed = config.master_seed;

  const int reps = config.replications;
  const int n_est = static_cast<int>(estimators.size());

  for (int n : config.n_values) {
    std::vector<detail::ReplicationSlot> slots(reps);

    auto run_range = [&](int begin, int end) {
      for (int r = begin; r < end; ++r) {
        auto& slot = slots[r];
        slot.estimates.assign(n_est, 0.0);
        slot.failed.assign(n_est, 0);
        const auto data = generate(config.spec, n, detail::replication_seed(config.master_seed, r));
        slot.ate_true = data.ate_true;
        for (int e = 0; e < n_est; ++e) {
          try {
            slot.estimates[e] = estimators[e].second(data.dataset);
          } catch (const error&) {
            slot.failed[e] = 1;
          }
        }
      }
    };

    if (workers == 1 || reps < 2 * workers) {
      run_range(0, reps);
    } else {
      std::vector<std::thread> pool;
      std::exception_ptr first_error;
      std::mutex error_mutex;
      const int chunk = (reps + workers - 1) / workers;
      for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(reps, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
          try {
            run_range(begin, end);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      if (first_error) std::rethrow_exception(first_error);
    }

    // Fixed-order reduction over replication indices.
    for (int e = 0; e < n_est; ++e) {
      McCell cell;
      cell.estimator = estimators[e].first;
      cell.n = n;
      std::vector<double> est, truth;
      est.reserve(reps);
      truth.reserve(reps);
      for (int r = 0; r < reps; ++r) {
        if (slots[r].failed[e]) {
          ++cell.failure_count;
          continue;
        }
        est.push_back(slots[r].estimates[e]);
        truth.push_back(slots[r].ate_true);
      }
      if (est.empty())
        raise(errc::all_replications_failed,
              std::string(estimator_name(cell.estimator)) + " failed in all " +
                  std::to_string(reps) + " replications at n = " + std::to_string(n));
      const auto stats = detail::variance_stats(est);
      cell.mean_estimate = stats.mean;
      cell.empirical_variance = stats.variance;
      cell.variance_se = stats.se_of_variance;
      std::vector<double> err(est.size());
      double bias = 0.0;
      for (std::size_t i = 0; i < est.size(); ++i) {
        err[i] = est[i] - truth[i];
        bias += err[i];
      }
      cell.empirical_bias = bias / static_cast<double>(err.size());
      cell.error_variance = detail::variance_stats(err).variance;
      if (config.keep_estimates) {
        cell.estimates = std::move(est);
        cell.truths = std::move(truth);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

inline McReport run_monte_carlo(const McConfig& config, int workers = 1) {
  std::vector<std::pair<EstimatorKind, EstimatorFn>> fns;
  for (EstimatorKind k : config.estimators)
    fns.emplace_back(k, [k](const Dataset& ds) { return estimate(ds, k).ate_hat; });
  return run_monte_carlo_with(config, fns, workers);
}

// ---------------------------------------------------------------------------
// Ranking sweeps over assignment probabilities.

struct RankingRow {
  double p = 0.0;
  EstimatorRanking ranking;
  double var_slr = 0.0, var_mlr = 0.0, var_mcm = 0.0;
  int failures_slr = 0, failures_mlr = 0, failures_mcm = 0;
  // Smallest adjacent gap in the ordering, in units of the Monte Carlo
  // standard error of that gap (paired across replications).
  double min_margin_sigmas = 0.0;
};

namespace detail {

// SE of var(b) - var(a) computed from the paired per-replication squared
// deviations, so correlation between estimators is accounted for.
inline double paired_variance_gap_sigmas(const std::vector<double>& a,
                                         const std::vector<double>& b,
                                         double var_a, double var_b) {
  const std::size_t r = std::min(a.size(), b.size());
  if (r < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(r);
  mb /= static_cast<double>(r);
  double mean_w = 0.0;
  std::vector<double> w(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    w[i] = db * db - da * da;
    mean_w += w[i];
  }
  mean_w /= static_cast<double>(r);
  double var_w = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    const double d = w[i] - mean_w;
    var_w += d * d;
  }
  var_w /= static_cast<double>(r - 1);
  const double se = std::sqrt(var_w / static_cast<double>(r));
  if (se == 0.0) return 0.0;
  return (var_b - var_a) / se;
}

}  // namespace detail

// One Monte Carlo run per p value, ranked by empirical variance. All runs
// share the master seed, so the p values see common random numbers.
inline std::vector<RankingRow> ranking_sweep(const SyntheticModelSpec& spec,
                                             const std::vector<double>& p_values,
                                             int n, int replications,
                                             std::uint64_t master_seed,
                                             int workers = 1) {
  if (p_values.empty()) raise(errc::invalid_argument, "no p values");
  std::vector<RankingRow> rows;
  for (double p : p_values) {
    if (!(p > 0.0 && p < 1.0))
      raise(errc::p_out_of_range, "sweep p must lie in (0, 1)");
    McConfig config;
    config.spec = spec;
    config.spec.p = p;
    config.n_values = {n};
    config.replications = replications;
    config.master_seed = master_seed;
    config.keep_estimates = true;
    const auto report = run_monte_carlo(config, workers);
    const auto& cs = report.cell(EstimatorKind::slr, n);
    const auto& cm = report.cell(EstimatorKind::mlr, n);
    const auto& cc = report.cell(EstimatorKind::mcm, n);

    RankingRow row;
    row.p = p;
    row.var_slr = cs.empirical_variance;
    row.var_mlr = cm.empirical_variance;
    row.var_mcm = cc.empirical_variance;
    row.failures_slr = cs.failure_count;
    row.failures_mlr = cm.failure_count;
    row.failures_mcm = cc.failure_count;
    row.ranking = rank_estimators(row.var_slr, row.var_mlr, row.var_mcm);

    auto cell_of = [&](EstimatorKind k) -> const McCell& { return report.cell(k, n); };
    const auto& best = cell_of(row.ranking.best);
    const auto& medium = cell_of(row.ranking.medium);
    const auto& worst = cell_of(row.ranking.worst);
    const double m1 = detail::paired_variance_gap_sigmas(
        best.estimates, medium.estimates, best.empirical_variance,
        medium.empirical_variance);
    const double m2 = detail::paired_variance_gap_sigmas(
        medium.estimates, worst.estimates, medium.empirical_variance,
        worst.empirical_variance);
    row.min_margin_sigmas = std::min(m1, m2);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Closed-form versus simulated variance.

// Distributional moments of (f, g, x) for the one-dimensional linear
// families, where the nominal formulas are defined. Gaussian covariates
// with unit variance make these exact.
inline std::optional<MomentSummary> model_moments(const SyntheticModelSpec& s) {
  const bool linear_1d =
      (s.family == ModelFamily::m14a || s.family == ModelFamily::m14b ||
       (s.family == ModelFamily::m29a && s.d == 1));
  if (!linear_1d) return std::nullopt;
  MomentSummary m;
  m.n = 0;
  m.var_x = 1.0;
  m.mean_x = s.covariate_mean[0];
  const double gamma = s.effect_linear[0];
  double beta = 0.0;  // linear baseline slope
  if (s.family == ModelFamily::m14a) beta = s.baseline[0];
  if (s.family == ModelFamily::m29a) beta = s.baseline[0];
  m.var_f = beta * beta;
  m.var_g = gamma * gamma;
  m.cov_gf = beta * gamma;
  m.cov_fx = beta;
  m.cov_gx = gamma;
  return m;
}

// Nominal (second-order) variance of an estimator under the model, when
// the derivation's regime applies: SLR/MLR need a one-dimensional linear
// model; MCM additionally needs a constant main effect and a purely linear
// treatment effect.
inline std::optional<double> nominal_variance(const SyntheticModelSpec& s,
                                              EstimatorKind kind, double p, int n) {
  const auto m = model_moments(s);
  if (!m) return std::nullopt;
  switch (kind) {
    case EstimatorKind::slr: return slr_variance_nominal(*m, p, n);
    case EstimatorKind::mlr: return mlr_variance_nominal(*m, p, n);
    case EstimatorKind::mcm:
      if (s.family == ModelFamily::m14b && s.effect0 == 0.0)
        return mcm_variance_nominal(s.effect_linear[0], s.covariate_mean[0], p, n);
      return std::nullopt;
  }
  return std::nullopt;
}

struct TheoryComparison {
  EstimatorKind estimator = EstimatorKind::slr;
  std::optional<double> nominal;
  double empirical = 0.0;  // variance of ate_hat - ate_true across replications
  std::optional<double> relative_error;
};

// Pairs each estimator's nominal variance with the simulated variance of
// its estimation error. Raises RegimeMismatch when the model family has no
// nominal formula at all.
inline std::vector<TheoryComparison> theory_vs_empirical(
    const SyntheticModelSpec& spec, double p, int n, int replications,
    std::uint64_t master_seed, int workers = 1) {
  SyntheticModelSpec s = spec;
  s.p = p;
  bool any_nominal = false;
  for (EstimatorKind k :
       {EstimatorKind::slr, EstimatorKind::mlr, EstimatorKind::mcm}) {
    if (nominal_variance(s, k, p, n)) any_nominal = true;
  }
  if (!any_nominal)
    raise(errc::regime_mismatch,
          std::string("no closed-form variance for family ") + family_token(s.family));

  McConfig config;
  config.spec = s;
  config.n_values = {n};
  config.replications = replications;
  config.master_seed = master_seed;
  const auto report = run_monte_carlo(config, workers);

  std::vector<TheoryComparison> out;
  for (EstimatorKind k :
       {EstimatorKind::slr, EstimatorKind::mlr, EstimatorKind::mcm}) {
    TheoryComparison c;
    c.estimator = k;
    c.nominal = nominal_variance(s, k, p, n);
    c.empirical = report.cell(k, n).error_variance;
    if (c.nominal && *c.nominal != 0.0)
      c.relative_error = std::fabs(c.empirical - *c.nominal) / std::fabs(*c.nominal);
    out.push_back(c);
  }
  return out;
}

}  // namespace drate
