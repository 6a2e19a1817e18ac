#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "causalreg/errors.hpp"
#include "causalreg/estimator.hpp"
#include "causalreg/selection.hpp"

namespace causalreg {

/// Bootstrap interval for the risk-stability statistic of the selected model.
struct BootstrapResult {
  double level = 0;  // 1 - alpha
  double lower = 0;
  double upper = 0;
  std::vector<double> draws;  // in replicate order
  LambdaValue chosen_lambda = LambdaValue::finite(0.0);
};

/// Type-1 empirical quantile: order statistic with index ceil(q * B).
inline double empirical_quantile_type1(std::vector<double> draws, double q) {
  if (draws.empty()) throw InvalidInput("quantile of an empty sample");
  std::sort(draws.begin(), draws.end());
  const auto b = static_cast<double>(draws.size());
  auto index = static_cast<long>(std::ceil(q * b));
  index = std::max<long>(1, std::min<long>(index, static_cast<long>(draws.size())));
  return draws[static_cast<std::size_t>(index - 1)];
}

namespace detail {

inline Dataset resample_with_replacement(const Dataset& d, const CounterRng& rng) {
  Dataset out;
  out.label = d.label;
  out.x.resize(d.n(), d.p());
  out.y.resize(d.n());
  for (long i = 0; i < d.n(); ++i) {
    const auto j = static_cast<long>(rng.uniform_below(
        static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(d.n())));
    out.x.row(i) = d.x.row(j);
    out.y(i) = d.y(j);
  }
  return out;
}

}  // namespace detail

/// Splits the data once via `split`, selects lambda on the training halves
/// (unless fixed_lambda is given), then refits the selected model on B
/// bootstrap resamples of the test halves and takes empirical quantiles of
/// |R^e_b - R^o_b|. Resampling is independent per environment and preserves
/// each test-set size.
inline BootstrapResult bootstrap_worst_risk_ci(
    const EnvPair& pair, const ResamplingPlan& split, const std::vector<LambdaValue>& grid,
    const ResamplingPlan& selection_plan, int b, double alpha, std::uint64_t seed,
    std::optional<LambdaValue> fixed_lambda = std::nullopt) {
  check_env_pair(pair);
  if (split.assignments.size() != 1) {
    throw InvalidInput("bootstrap needs a single train/test split");
  }
  if (b < 1) throw InvalidInput("bootstrap needs at least one replicate");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in (0, 1]");
  detail::check_plan_against_pair(split, pair);

  const auto& assignment = split.assignments.front();
  const EnvPair train = train_pair(pair, assignment);
  const EnvPair test = test_pair(pair, assignment);
  if (test.shifted.n() < 2 || test.obs.n() < 2 || train.shifted.n() < 1 || train.obs.n() < 1) {
    throw DegenerateResample("train/test halves too small to bootstrap");
  }

  BootstrapResult out;
  out.level = 1.0 - alpha;
  if (fixed_lambda) {
    out.chosen_lambda = *fixed_lambda;
  } else {
    validate_grid(grid);
    out.chosen_lambda = sample_selector(train, grid, selection_plan).chosen_lambda;
  }

  out.draws.resize(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    const std::uint64_t key = derive_seed(seed, static_cast<std::uint64_t>(i));
    EnvPair resample;
    resample.shifted =
        detail::resample_with_replacement(test.shifted, CounterRng(derive_seed(key, 1)));
    resample.obs = detail::resample_with_replacement(test.obs, CounterRng(derive_seed(key, 2)));
    if (resample.shifted.n() < 2 || resample.obs.n() < 2) {
      throw DegenerateResample("bootstrap resample too small");
    }
    const FitResult refit = fit_on_datasets(resample, out.chosen_lambda);
    out.draws[static_cast<std::size_t>(i)] = std::abs(
        empirical_risk(resample.shifted, refit.beta) - empirical_risk(resample.obs, refit.beta));
  }

  out.lower = empirical_quantile_type1(out.draws, alpha / 2.0);
  out.upper = empirical_quantile_type1(out.draws, 1.0 - alpha / 2.0);
  return out;
}

}  // namespace causalreg
