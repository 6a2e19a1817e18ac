#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "causalreg/errors.hpp"
#include "causalreg/linalg.hpp"
#include "causalreg/moments.hpp"

namespace causalreg {

/// Regularization strength: a finite nonnegative value or the infinity
/// endpoint. The endpoint is an explicit state, never a large float.
class LambdaValue {
 public:
  static LambdaValue finite(double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("lambda must be finite and >= 0");
    return LambdaValue(v, false);
  }
  static LambdaValue infinity() { return LambdaValue(0.0, true); }

  bool is_infinite() const { return infinite_; }
  double value() const {
    if (infinite_) throw InvalidInput("finite value requested from infinite lambda");
    return value_;
  }
  // +inf for the endpoint; for reporting only
  double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend bool operator==(const LambdaValue& a, const LambdaValue& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend bool operator<(const LambdaValue& a, const LambdaValue& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }

 private:
  LambdaValue(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

inline void validate_grid(const std::vector<LambdaValue>& lambdas) {
  if (lambdas.empty()) throw InvalidGrid("empty lambda grid");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i - 1] < lambdas[i])) {
      throw InvalidGrid("lambda grid must be strictly increasing (infinity last)");
    }
  }
}

/// {0} plus 20 log-spaced values in [1e-2, 1e3] plus the infinity endpoint.
inline std::vector<LambdaValue> default_lambda_grid() {
  std::vector<LambdaValue> grid;
  grid.push_back(LambdaValue::finite(0.0));
  const int k = 20;
  for (int i = 0; i < k; ++i) {
    const double expo = -2.0 + 5.0 * static_cast<double>(i) / (k - 1);
    grid.push_back(LambdaValue::finite(std::pow(10.0, expo)));
  }
  grid.push_back(LambdaValue::infinity());
  return grid;
}

struct FitResult {
  Eigen::VectorXd beta;
  bool rank_deficient = false;  // pseudo-inverse fallback fired / moment matrix rank-deficient
  ClipStats clip;               // negative sample eigenvalues zeroed on the way
};

namespace detail {

// Clipped moment matrices shared by every point of a path fit.
struct PreparedMoments {
  SymMatrix g_plus_c;
  SymMatrix g_diff_c;
  Eigen::VectorXd z_plus;
  Eigen::VectorXd projected_z;  // proj onto range(clip(g_diff)) applied to z_diff
  Eigen::VectorXd z_diff;
  int g_diff_rank;
  ClipStats clip;
};

inline PreparedMoments prepare(const MomentSummary& m, double clip_tol) {
  ClipStats stats;
  SymMatrix g_diff_c = clip_psd(m.g_diff, clip_tol, &stats);
  SymMatrix g_plus_c = clip_psd(m.g_plus, clip_tol, &stats);
  const Eigen::VectorXd pz = g_diff_c.mat() * (pinv_psd(g_diff_c).mat() * m.z_diff);
  const int rank = psd_rank(g_diff_c);
  return PreparedMoments{std::move(g_plus_c), std::move(g_diff_c),
                         m.z_plus,            pz,
                         m.z_diff,            rank,
                         stats};
}

inline FitResult fit_prepared(const PreparedMoments& pm, LambdaValue lambda) {
  FitResult out;
  out.clip = pm.clip;
  const int p = pm.g_diff_c.dim();
  if (lambda.is_infinite()) {
    // minimum-norm solution of the moment equation g_diff * beta = z_diff
    out.beta = pinv_psd(pm.g_diff_c).mat() * pm.z_diff;
    out.rank_deficient = pm.g_diff_rank < p;
    return out;
  }
  const SymMatrix system(pm.g_plus_c.mat() + lambda.value() * pm.g_diff_c.mat());
  const Eigen::VectorXd rhs = pm.z_plus + lambda.value() * pm.projected_z;
  if (psd_rank(system) == p) {
    out.beta = solve_spd(system, rhs);
  } else {
    out.beta = pinv_psd(system).mat() * rhs;
    out.rank_deficient = true;
  }
  return out;
}

}  // namespace detail

/// Closed-form regularized estimator: solves
/// (clip(g_plus) + lambda clip(g_diff)) beta = z_plus + lambda P z_diff with
/// P the projection onto range(clip(g_diff)); minimum-norm via pseudo-inverse
/// when the system is singular. lambda = infinity returns the minimum-norm
/// solution of the moment equation.
inline FitResult fit(const MomentSummary& m, LambdaValue lambda,
                     double clip_tol = kAlwaysClip) {
  return detail::fit_prepared(detail::prepare(m, clip_tol), lambda);
}

struct RegularizationPath {
  std::vector<LambdaValue> lambdas;
  std::vector<Eigen::VectorXd> coefs;
  std::vector<bool> rank_deficient;
};

inline RegularizationPath fit_path(const MomentSummary& m,
                                   const std::vector<LambdaValue>& lambdas,
                                   double clip_tol = kAlwaysClip) {
  validate_grid(lambdas);
  const detail::PreparedMoments pm = detail::prepare(m, clip_tol);
  RegularizationPath path;
  path.lambdas = lambdas;
  path.coefs.reserve(lambdas.size());
  path.rank_deficient.reserve(lambdas.size());
  for (const LambdaValue& lambda : lambdas) {
    FitResult r = detail::fit_prepared(pm, lambda);
    path.coefs.push_back(std::move(r.beta));
    path.rank_deficient.push_back(r.rank_deficient);
  }
  return path;
}

inline FitResult fit_on_datasets(const EnvPair& pair, LambdaValue lambda,
                                 double clip_tol = kAlwaysClip) {
  return fit(compute_moments(pair), lambda, clip_tol);
}

}  // namespace causalreg
