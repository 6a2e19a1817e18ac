#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "causalreg/errors.hpp"
#include "causalreg/estimator.hpp"
#include "causalreg/moments.hpp"
#include "causalreg/population.hpp"
#include "causalreg/rng.hpp"
#include "causalreg/sem.hpp"

namespace causalreg {

/// Distribution over train/test indicator pairs, one indicator string per
/// environment (1 = test). A single assignment is sample splitting; V
/// equally-weighted assignments whose test sets partition the indices are
/// V-fold cross-validation.
struct ResamplingPlan {
  struct Assignment {
    std::vector<std::uint8_t> test_shifted;
    std::vector<std::uint8_t> test_obs;
  };
  std::vector<Assignment> assignments;
  std::vector<double> weights;
};

namespace detail {

inline std::vector<std::uint8_t> indicator(long n, const std::vector<int>& test_indices) {
  std::vector<std::uint8_t> s(static_cast<std::size_t>(n), 0);
  for (int i : test_indices) s[static_cast<std::size_t>(i)] = 1;
  return s;
}

inline Dataset take_rows(const Dataset& d, const std::vector<std::uint8_t>& mask,
                         std::uint8_t keep) {
  long count = 0;
  for (std::uint8_t m : mask) count += (m == keep);
  Dataset out;
  out.label = d.label;
  out.x.resize(count, d.p());
  out.y.resize(count);
  long r = 0;
  for (long i = 0; i < d.n(); ++i) {
    if (mask[static_cast<std::size_t>(i)] == keep) {
      out.x.row(r) = d.x.row(i);
      out.y(r) = d.y(i);
      ++r;
    }
  }
  return out;
}

inline void check_plan_against_pair(const ResamplingPlan& plan, const EnvPair& pair) {
  if (plan.assignments.empty()) throw InvalidInput("resampling plan has no assignments");
  if (plan.weights.size() != plan.assignments.size()) {
    throw InvalidInput("resampling plan weights do not match assignments");
  }
  for (const auto& a : plan.assignments) {
    if (static_cast<long>(a.test_shifted.size()) != pair.shifted.n() ||
        static_cast<long>(a.test_obs.size()) != pair.obs.n()) {
      throw InvalidInput("resampling plan indicator lengths do not match the data");
    }
  }
}

}  // namespace detail

inline EnvPair train_pair(const EnvPair& pair, const ResamplingPlan::Assignment& a) {
  return EnvPair{detail::take_rows(pair.obs, a.test_obs, 0),
                 detail::take_rows(pair.shifted, a.test_shifted, 0)};
}

inline EnvPair test_pair(const EnvPair& pair, const ResamplingPlan::Assignment& a) {
  return EnvPair{detail::take_rows(pair.obs, a.test_obs, 1),
                 detail::take_rows(pair.shifted, a.test_shifted, 1)};
}

/// Single train/test split with ceil(test_fraction * n) test rows per
/// environment, drawn uniformly without replacement.
inline ResamplingPlan make_split(long n_e, long n_o, double test_fraction,
                                 std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidInput("test_fraction must lie in (0, 1)");
  }
  ResamplingPlan plan;
  ResamplingPlan::Assignment a;
  const long ns[2] = {n_e, n_o};
  for (int env = 0; env < 2; ++env) {
    const long n = ns[env];
    const long k = static_cast<long>(std::ceil(test_fraction * static_cast<double>(n)));
    if (k < 2 || n - k < 2) throw TooFewObservations("split leaves fewer than 2 train or test rows");
    const CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(env + 1)));
    std::vector<int> perm = shuffled_indices(static_cast<int>(n), rng);
    perm.resize(static_cast<std::size_t>(k));
    auto s = detail::indicator(n, perm);
    (env == 0 ? a.test_shifted : a.test_obs) = std::move(s);
  }
  plan.assignments.push_back(std::move(a));
  plan.weights.push_back(1.0);
  return plan;
}

/// V-fold plan: per environment the test folds partition the indices with
/// sizes differing by at most one (the first n mod V folds get the extra row).
/// Folds are drawn independently per environment.
inline ResamplingPlan make_vfold(long n_e, long n_o, int v, std::uint64_t seed) {
  if (v < 2) throw InvalidInput("V-fold needs v >= 2");
  if (v > std::min(n_e, n_o)) throw TooManyFolds("more folds than observations");
  ResamplingPlan plan;
  plan.assignments.resize(static_cast<std::size_t>(v));
  plan.weights.assign(static_cast<std::size_t>(v), 1.0 / static_cast<double>(v));

  const long ns[2] = {n_e, n_o};
  for (int env = 0; env < 2; ++env) {
    const long n = ns[env];
    const CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(env + 1)));
    const std::vector<int> perm = shuffled_indices(static_cast<int>(n), rng);
    long offset = 0;
    for (int j = 0; j < v; ++j) {
      const long size = n / v + (j < n % v ? 1 : 0);
      std::vector<int> fold(perm.begin() + offset, perm.begin() + offset + size);
      offset += size;
      auto s = detail::indicator(n, fold);
      auto& a = plan.assignments[static_cast<std::size_t>(j)];
      (env == 0 ? a.test_shifted : a.test_obs) = std::move(s);
    }
  }
  return plan;
}

/// Outcome of a selector run over a lambda grid. loss_curve is the
/// plan-weighted average of per_fold_losses; chosen_lambda attains its minimum
/// with ties broken toward the largest lambda.
struct SelectorResult {
  LambdaValue chosen_lambda = LambdaValue::finite(0.0);
  std::vector<double> loss_curve;
  Eigen::MatrixXd per_fold_losses;  // folds x lambdas
  std::vector<LambdaValue> fold_chosen;
};

namespace detail {

inline std::size_t argmin_prefer_last(const Eigen::VectorXd& values) {
  std::size_t best = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) <= values(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

inline SelectorResult assemble_result(const std::vector<LambdaValue>& grid,
                                      const Eigen::MatrixXd& per_fold,
                                      const std::vector<double>& weights) {
  SelectorResult out;
  out.per_fold_losses = per_fold;
  Eigen::VectorXd curve = Eigen::VectorXd::Zero(per_fold.cols());
  for (Eigen::Index f = 0; f < per_fold.rows(); ++f) {
    curve += weights[static_cast<std::size_t>(f)] * per_fold.row(f).transpose();
  }
  out.loss_curve.assign(curve.data(), curve.data() + curve.size());
  out.chosen_lambda = grid[argmin_prefer_last(curve)];
  out.fold_chosen.reserve(static_cast<std::size_t>(per_fold.rows()));
  for (Eigen::Index f = 0; f < per_fold.rows(); ++f) {
    out.fold_chosen.push_back(grid[argmin_prefer_last(per_fold.row(f).transpose())]);
  }
  return out;
}

struct FoldScores {
  Eigen::MatrixXd sample;      // |R^e(test) - R^o(test)| per fold and lambda
  Eigen::MatrixXd population;  // population risk difference, if requested
};

inline FoldScores evaluate_folds(const EnvPair& pair, const std::vector<LambdaValue>& grid,
                                 const ResamplingPlan& plan,
                                 const PopulationShiftForm* form) {
  validate_grid(grid);
  check_env_pair(pair);
  check_plan_against_pair(plan, pair);
  const auto folds = static_cast<Eigen::Index>(plan.assignments.size());
  const auto k = static_cast<Eigen::Index>(grid.size());
  FoldScores scores;
  scores.sample.resize(folds, k);
  if (form) scores.population.resize(folds, k);

  for (Eigen::Index f = 0; f < folds; ++f) {
    const auto& a = plan.assignments[static_cast<std::size_t>(f)];
    const EnvPair train = train_pair(pair, a);
    const EnvPair test = test_pair(pair, a);
    const MomentSummary m = compute_moments(train);
    const RegularizationPath path = fit_path(m, grid);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::VectorXd& beta = path.coefs[static_cast<std::size_t>(j)];
      scores.sample(f, j) = std::abs(empirical_risk(test.shifted, beta) -
                                     empirical_risk(test.obs, beta));
      if (form) scores.population(f, j) = form->rdiff(beta);
    }
  }
  return scores;
}

}  // namespace detail

/// Cross-validated selector on the absolute out-of-fold risk difference.
inline SelectorResult sample_selector(const EnvPair& pair,
                                      const std::vector<LambdaValue>& grid,
                                      const ResamplingPlan& plan) {
  const auto scores = detail::evaluate_folds(pair, grid, plan, nullptr);
  return detail::assemble_result(grid, scores.sample, plan.weights);
}

/// Oracle selector scoring the same fold fits with the population risk
/// difference (simulation only).
inline SelectorResult population_selector(const SemStructure& structure,
                                          const ShiftSpec& shift, const EnvPair& pair,
                                          const std::vector<LambdaValue>& grid,
                                          const ResamplingPlan& plan) {
  const PopulationShiftForm form = population_shift_form(structure, shift);
  const auto scores = detail::evaluate_folds(pair, grid, plan, &form);
  return detail::assemble_result(grid, scores.population, plan.weights);
}

/// Per-realization oracle: fold_chosen holds each realization's own argmin of
/// the population criterion (no averaging before the argmin).
inline SelectorResult s_optimal_selector(const SemStructure& structure,
                                         const ShiftSpec& shift, const EnvPair& pair,
                                         const std::vector<LambdaValue>& grid,
                                         const ResamplingPlan& plan) {
  return population_selector(structure, shift, pair, grid, plan);
}

/// Sample and population selectors evaluated on common fits (one fitting pass).
struct SelectorComparison {
  SelectorResult sample;
  SelectorResult population;
};

inline SelectorComparison run_selectors(const SemStructure& structure, const ShiftSpec& shift,
                                        const EnvPair& pair,
                                        const std::vector<LambdaValue>& grid,
                                        const ResamplingPlan& plan) {
  const PopulationShiftForm form = population_shift_form(structure, shift);
  const auto scores = detail::evaluate_folds(pair, grid, plan, &form);
  return SelectorComparison{detail::assemble_result(grid, scores.sample, plan.weights),
                            detail::assemble_result(grid, scores.population, plan.weights)};
}

}  // namespace causalreg
