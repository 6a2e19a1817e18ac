#pragma once

#include <Eigen/Dense>

#include "causalreg/linalg.hpp"
#include "causalreg/sem.hpp"

namespace causalreg {

/// Sample second moments of the two environments and their sums/differences
/// (1/n normalization, no centering). g_diff/z_diff are shifted minus
/// observational; g_plus/z_plus the sums.
struct MomentSummary {
  SymMatrix g_diff;
  SymMatrix g_plus;
  SymMatrix gxx_shifted;
  SymMatrix gxx_obs;
  Eigen::VectorXd z_diff;
  Eigen::VectorXd z_plus;
  Eigen::VectorXd zxy_shifted;
  Eigen::VectorXd zxy_obs;
  double yy_e = 0;
  double yy_o = 0;
  long n_e = 0;
  long n_o = 0;

  int p() const { return g_diff.dim(); }
};

inline MomentSummary compute_moments(const EnvPair& pair) {
  check_env_pair(pair);
  const auto& e = pair.shifted;
  const auto& o = pair.obs;
  const double ne = static_cast<double>(e.n());
  const double no = static_cast<double>(o.n());

  const Eigen::MatrixXd gxx_e = e.x.transpose() * e.x / ne;
  const Eigen::MatrixXd gxx_o = o.x.transpose() * o.x / no;
  const Eigen::VectorXd zxy_e = e.x.transpose() * e.y / ne;
  const Eigen::VectorXd zxy_o = o.x.transpose() * o.y / no;

  return MomentSummary{
      SymMatrix(gxx_e - gxx_o), SymMatrix(gxx_e + gxx_o),
      SymMatrix(gxx_e),         SymMatrix(gxx_o),
      zxy_e - zxy_o,            zxy_e + zxy_o,
      zxy_e,                    zxy_o,
      e.y.squaredNorm() / ne,   o.y.squaredNorm() / no,
      e.n(),                    o.n()};
}

/// Mean squared prediction error (1/n) sum (y_i - beta^T x_i)^2.
inline double empirical_risk(const Dataset& d, const Eigen::VectorXd& beta) {
  if (beta.size() != d.p()) throw InvalidInput("empirical_risk: beta dimension mismatch");
  return (d.y - d.x * beta).squaredNorm() / static_cast<double>(d.n());
}

inline double risk_sum_hat(const EnvPair& pair, const Eigen::VectorXd& beta) {
  return empirical_risk(pair.shifted, beta) + empirical_risk(pair.obs, beta);
}

/// Shifted minus observational empirical risk.
inline double risk_diff_hat(const EnvPair& pair, const Eigen::VectorXd& beta) {
  return empirical_risk(pair.shifted, beta) - empirical_risk(pair.obs, beta);
}

/// Convexified risk-stability penalty: with Gc = clip(g_diff), the quadratic
/// form (Gc beta - z_diff)^T pinv(Gc) (Gc beta - z_diff). Evaluating through
/// the pseudo-inverse of Gc matches the square-root form
/// ||pinv(sqrt(Gc))^T (Gc beta - z_diff)||^2 and keeps one factorization.
inline double regularizer_norm_hat(const MomentSummary& m, const Eigen::VectorXd& beta,
                                   double clip_tol = kAlwaysClip,
                                   ClipStats* stats = nullptr) {
  if (beta.size() != m.p()) throw InvalidInput("regularizer_norm_hat: beta dimension mismatch");
  const SymMatrix g_clipped = clip_psd(m.g_diff, clip_tol, stats);
  const Eigen::VectorXd residual = g_clipped.mat() * beta - m.z_diff;
  const double value = residual.dot(pinv_psd(g_clipped).mat() * residual);
  return std::max(value, 0.0);
}

/// The empirical objective whose minimizer is the regularized estimator:
/// (1/2) pooled risk + (lambda/2) regularizer.
inline double empirical_objective(const EnvPair& pair, const MomentSummary& m,
                                  const Eigen::VectorXd& beta, double lambda) {
  return 0.5 * risk_sum_hat(pair, beta) + 0.5 * lambda * regularizer_norm_hat(m, beta);
}

}  // namespace causalreg
