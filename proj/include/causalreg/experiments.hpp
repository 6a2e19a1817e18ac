#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "causalreg/bootstrap.hpp"
#include "causalreg/bounds.hpp"
#include "causalreg/config.hpp"
#include "causalreg/estimator.hpp"
#include "causalreg/moments.hpp"
#include "causalreg/population.hpp"
#include "causalreg/selection.hpp"
#include "causalreg/sem.hpp"
#include "causalreg/table.hpp"

namespace causalreg {

namespace detail {

// Runs fn(0..count-1) on up to `threads` workers. Tasks own disjoint output
// slots, so scheduling cannot change the result.
template <typename Fn>
void parallel_for_indexed(long count, int threads, const Fn& fn) {
  threads = static_cast<int>(std::min<long>(std::max(threads, 1), count));
  if (threads <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline std::uint64_t task_seed(std::uint64_t master, std::size_t n_index, long replication) {
  return derive_seed(derive_seed(master, 0x100 + static_cast<std::uint64_t>(n_index)),
                     static_cast<std::uint64_t>(replication));
}

struct ExperimentContext {
  SemStructure structure;
  NoiseSpec noise;
  ShiftSpec shift;
  PopulationQuantities pq;
};

inline ExperimentContext make_context(const ExperimentConfig& cfg) {
  SemStructure s = structure_from_config(cfg);
  const int p = s.p();
  NoiseSpec noise = NoiseSpec::scaled_identity(p, cfg.noise_scale);
  ShiftSpec shift = ShiftSpec::scaled_identity(p, cfg.shift_scale);
  PopulationQuantities pq = compute_population(s, noise, shift);
  return ExperimentContext{std::move(s), std::move(noise), std::move(shift), std::move(pq)};
}

}  // namespace detail

/// Least-squares slope of log(y) against log(x); the decay-rate diagnostic for
/// the convergence experiment.
inline double log_log_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw InvalidInput("log_log_slope needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw InvalidInput("log_log_slope needs positive values");
    const double lx = std::log(x);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const auto n = static_cast<double>(points.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Normalized excess risk of the fixed-lambda fit versus the concentration
/// prediction, per sample size and replication, with per-n means.
inline ResultTable exp_convergence(const ExperimentConfig& cfg) {
  const auto ctx = detail::make_context(cfg);
  const std::string run_id = "convergence-" + std::to_string(cfg.seed);
  const LambdaValue lambda = LambdaValue::finite(cfg.convergence_lambda);

  struct Point {
    double abs_excess = 0;
    double phi_prediction = 0;
  };
  const std::size_t n_count = cfg.sample_sizes.size();
  const long reps = cfg.replications;
  std::vector<Point> points(n_count * static_cast<std::size_t>(reps));

  detail::parallel_for_indexed(
      static_cast<long>(points.size()), cfg.threads, [&](long task) {
        const std::size_t n_index = static_cast<std::size_t>(task) / static_cast<std::size_t>(reps);
        const long rep = task % reps;
        const long n = cfg.sample_sizes[n_index];
        const EnvPair pair = sample_env_pair(ctx.structure, ctx.noise, ctx.shift, n, n,
                                             detail::task_seed(cfg.seed, n_index, rep));
        const FitResult fitted = fit(compute_moments(pair), lambda);
        const double core = bound_core(risk_sum_hat(pair, fitted.beta),
                                       risk_diff_hat(pair, fitted.beta), cfg.tau);
        const double sup = population_worst_risk(ctx.pq, fitted.beta, cfg.tau);
        Point& pt = points[static_cast<std::size_t>(task)];
        pt.abs_excess = std::abs(normalized_excess_risk(fitted.beta, sup, core, cfg.tau));
        BoundInputs in{ctx.pq.p(),          n,
                       n,                   1.0,
                       ctx.pq.var_y_shifted, ctx.pq.var_y_obs,
                       ctx.pq.max_var_x_shifted, ctx.pq.max_var_x_obs,
                       false};
        pt.phi_prediction = phi_plus(in);
      });

  ResultTable table;
  for (std::size_t ni = 0; ni < n_count; ++ni) {
    const long n = cfg.sample_sizes[ni];
    double sum_excess = 0, sum_phi = 0;
    for (long rep = 0; rep < reps; ++rep) {
      const Point& pt = points[ni * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)];
      table.add({run_id, "convergence", rep, n, cfg.convergence_lambda, "abs_excess_risk",
                 pt.abs_excess});
      table.add({run_id, "convergence", rep, n, cfg.convergence_lambda, "phi_prediction",
                 pt.phi_prediction});
      sum_excess += pt.abs_excess;
      sum_phi += pt.phi_prediction;
    }
    table.add({run_id, "convergence", kAggregate, n, cfg.convergence_lambda,
               "mean_abs_excess_risk", sum_excess / static_cast<double>(reps)});
    table.add({run_id, "convergence", kAggregate, n, cfg.convergence_lambda,
               "mean_phi_prediction", sum_phi / static_cast<double>(reps)});
  }
  return table;
}

/// Bootstrap interval per replication plus per-n coverage of the population
/// target and interval-width aggregates.
inline ResultTable exp_coverage(const ExperimentConfig& cfg) {
  const auto ctx = detail::make_context(cfg);
  const std::string run_id = "coverage-" + std::to_string(cfg.seed);
  const LambdaValue fixed = LambdaValue::finite(cfg.bootstrap_lambda);
  const double target =
      population_rdiff(ctx.pq, population_beta_lambda(ctx.pq, fixed));

  struct Interval {
    double lower = 0, upper = 0, chosen = 0;
    bool covered = false;
  };
  const std::size_t n_count = cfg.sample_sizes.size();
  const long reps = cfg.replications;
  std::vector<Interval> intervals(n_count * static_cast<std::size_t>(reps));

  detail::parallel_for_indexed(
      static_cast<long>(intervals.size()), cfg.threads, [&](long task) {
        const std::size_t n_index = static_cast<std::size_t>(task) / static_cast<std::size_t>(reps);
        const long rep = task % reps;
        const long n = cfg.sample_sizes[n_index];
        const std::uint64_t seed = detail::task_seed(cfg.seed, n_index, rep);
        const EnvPair pair =
            sample_env_pair(ctx.structure, ctx.noise, ctx.shift, n, n, seed);
        const ResamplingPlan split =
            make_split(n, n, cfg.split_fraction, derive_seed(seed, 11));

        std::optional<LambdaValue> fixed_lambda = fixed;
        ResamplingPlan selection_plan;
        if (cfg.bootstrap_use_selector) {
          fixed_lambda.reset();
          const EnvPair train = train_pair(pair, split.assignments.front());
          selection_plan = make_vfold(train.shifted.n(), train.obs.n(), cfg.folds,
                                      derive_seed(seed, 12));
        }
        const BootstrapResult res = bootstrap_worst_risk_ci(
            pair, split, cfg.lambda_grid, selection_plan, cfg.bootstrap_replicates,
            cfg.alpha, derive_seed(seed, 13), fixed_lambda);
        Interval& out = intervals[static_cast<std::size_t>(task)];
        out.lower = res.lower;
        out.upper = res.upper;
        out.chosen = res.chosen_lambda.as_double();
        out.covered = target >= res.lower && target <= res.upper;
      });

  ResultTable table;
  for (std::size_t ni = 0; ni < n_count; ++ni) {
    const long n = cfg.sample_sizes[ni];
    std::vector<double> widths;
    double covered = 0;
    for (long rep = 0; rep < reps; ++rep) {
      const Interval& iv =
          intervals[ni * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)];
      table.add({run_id, "coverage", rep, n, iv.chosen, "ci_lower", iv.lower});
      table.add({run_id, "coverage", rep, n, iv.chosen, "ci_upper", iv.upper});
      table.add({run_id, "coverage", rep, n, iv.chosen, "ci_width", iv.upper - iv.lower});
      table.add({run_id, "coverage", rep, n, iv.chosen, "covered", iv.covered ? 1.0 : 0.0});
      widths.push_back(iv.upper - iv.lower);
      covered += iv.covered ? 1.0 : 0.0;
    }
    table.add({run_id, "coverage", kAggregate, n, cfg.bootstrap_lambda, "target", target});
    table.add({run_id, "coverage", kAggregate, n, cfg.bootstrap_lambda, "coverage",
               covered / static_cast<double>(reps)});
    table.add({run_id, "coverage", kAggregate, n, cfg.bootstrap_lambda, "median_width",
               detail::median(widths)});
  }
  return table;
}

/// Cross-validated causal regularization versus the causal-Dantzig endpoint on
/// increasingly shifted out-of-sample data.
inline ResultTable exp_compare(const ExperimentConfig& cfg) {
  const auto ctx = detail::make_context(cfg);
  const std::string run_id = "compare-" + std::to_string(cfg.seed);

  struct Outcome {
    double chosen = 0;
    std::vector<double> risk_cv;       // per shift scale
    std::vector<double> risk_dantzig;  // per shift scale
  };
  const std::size_t n_count = cfg.sample_sizes.size();
  const long reps = cfg.replications;
  std::vector<Outcome> outcomes(n_count * static_cast<std::size_t>(reps));

  detail::parallel_for_indexed(
      static_cast<long>(outcomes.size()), cfg.threads, [&](long task) {
        const std::size_t n_index = static_cast<std::size_t>(task) / static_cast<std::size_t>(reps);
        const long rep = task % reps;
        const long n = cfg.sample_sizes[n_index];
        const std::uint64_t seed = detail::task_seed(cfg.seed, n_index, rep);
        const EnvPair pair =
            sample_env_pair(ctx.structure, ctx.noise, ctx.shift, n, n, seed);
        const ResamplingPlan plan =
            cfg.selector_type == "vfold"
                ? make_vfold(n, n, cfg.folds, derive_seed(seed, 21))
                : make_split(n, n, cfg.split_fraction, derive_seed(seed, 21));
        const LambdaValue chosen =
            sample_selector(pair, cfg.lambda_grid, plan).chosen_lambda;

        const MomentSummary m = compute_moments(pair);
        const Eigen::VectorXd beta_cv = fit(m, chosen).beta;
        const Eigen::VectorXd beta_cd = fit(m, LambdaValue::infinity()).beta;

        Outcome& out = outcomes[static_cast<std::size_t>(task)];
        out.chosen = chosen.as_double();
        for (std::size_t si = 0; si < cfg.shift_scales.size(); ++si) {
          const double scale = cfg.shift_scales[si];
          const Dataset oos = sample_sem(
              ctx.structure, ctx.noise, ShiftSpec::scaled_identity(ctx.structure.p(), scale),
              cfg.out_of_sample_n, derive_seed(seed, 30 + static_cast<std::uint64_t>(si)),
              "out-of-sample");
          out.risk_cv.push_back(empirical_risk(oos, beta_cv));
          out.risk_dantzig.push_back(empirical_risk(oos, beta_cd));
        }
      });

  ResultTable table;
  for (std::size_t ni = 0; ni < n_count; ++ni) {
    const long n = cfg.sample_sizes[ni];
    for (std::size_t si = 0; si < cfg.shift_scales.size(); ++si) {
      const std::string scale_tag = format_short(cfg.shift_scales[si]);
      std::vector<double> cv, cd;
      for (long rep = 0; rep < reps; ++rep) {
        const Outcome& out =
            outcomes[ni * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)];
        table.add({run_id, "compare", rep, n, out.chosen, "oos_risk_cv_" + scale_tag,
                   out.risk_cv[si]});
        table.add({run_id, "compare", rep, n,
                   std::numeric_limits<double>::infinity(),
                   "oos_risk_dantzig_" + scale_tag, out.risk_dantzig[si]});
        cv.push_back(out.risk_cv[si]);
        cd.push_back(out.risk_dantzig[si]);
      }
      const double scale = cfg.shift_scales[si];
      table.add({run_id, "compare", kAggregate, n, scale, "median_oos_risk_cv_" + scale_tag,
                 detail::median(cv)});
      table.add({run_id, "compare", kAggregate, n, scale,
                 "median_oos_risk_dantzig_" + scale_tag, detail::median(cd)});
      table.add({run_id, "compare", kAggregate, n, scale,
                 "median_norm_oos_risk_cv_" + scale_tag, detail::median(cv) / scale});
      table.add({run_id, "compare", kAggregate, n, scale,
                 "median_norm_oos_risk_dantzig_" + scale_tag, detail::median(cd) / scale});
    }
    for (long rep = 0; rep < reps; ++rep) {
      const Outcome& out =
          outcomes[ni * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)];
      table.add({run_id, "compare", rep, n, out.chosen, "chosen_lambda", out.chosen});
    }
  }
  return table;
}

}  // namespace causalreg
