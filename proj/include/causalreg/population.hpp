#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "causalreg/errors.hpp"
#include "causalreg/estimator.hpp"
#include "causalreg/linalg.hpp"
#include "causalreg/moments.hpp"
#include "causalreg/sem.hpp"

namespace causalreg {

/// Exact population quantities of a simulated SEM. total_effect is the matrix
/// mapping shift coordinates into X-space; g_diff = total_effect * C[A] *
/// total_effect^T and g_sum are the shifted-plus/minus-observational second
/// moments of X.
struct PopulationQuantities {
  Eigen::MatrixXd total_effect;  // p x p, inverse of (I - b_x) - beta_ch beta_pa^T
  SymMatrix g_diff;
  SymMatrix g_sum;
  Eigen::VectorXd z_diff;
  Eigen::VectorXd z_plus;
  Eigen::VectorXd beta_ols;
  Eigen::VectorXd beta_pa;
  Eigen::VectorXd beta_ch;
  double y2_sum = 0;    // E[Y_e^2] + E[Y_o^2]
  double rsum_min = 0;  // pooled risk at its minimizer beta_ols
  double var_y_shifted = 0;  // population variances for the concentration bounds
  double var_y_obs = 0;
  double max_var_x_shifted = 0;
  double max_var_x_obs = 0;
  bool identity_covariances = false;

  int p() const { return static_cast<int>(beta_pa.size()); }
};

inline PopulationQuantities compute_population(const SemStructure& structure,
                                               const NoiseSpec& noise,
                                               const ShiftSpec& shift) {
  const SemStructure s = validate_structure(structure);
  const int p = s.p();
  if (noise.cov.dim() != p + 1 || shift.cov.dim() != p) {
    throw InvalidInput("compute_population: covariance dimensions inconsistent");
  }

  const Eigen::MatrixXd solve = (Eigen::MatrixXd::Identity(p + 1, p + 1) - s.assemble())
                                    .fullPivLu()
                                    .inverse();
  PopulationQuantities q;
  q.total_effect = solve.block(1, 1, p, p);
  q.beta_pa = s.beta_pa;
  q.beta_ch = s.beta_ch;

  const Eigen::MatrixXd check =
      q.total_effect *
      ((Eigen::MatrixXd::Identity(p, p) - s.b_x) - s.beta_ch * s.beta_pa.transpose());
  if ((check - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() > 1e-10) {
    throw NumericError("compute_population: total-effect matrix failed its defining identity");
  }

  // second moments of (Y, X) per environment: solve * (noise + shift block) * solve^T
  Eigen::MatrixXd driver_obs = noise.cov.mat();
  Eigen::MatrixXd driver_shifted = noise.cov.mat();
  driver_shifted.block(1, 1, p, p) += shift.cov.mat();
  const Eigen::MatrixXd second_obs = solve * driver_obs * solve.transpose();
  const Eigen::MatrixXd second_shifted = solve * driver_shifted * solve.transpose();

  const Eigen::MatrixXd exx_o = second_obs.block(1, 1, p, p);
  const Eigen::MatrixXd exx_e = second_shifted.block(1, 1, p, p);
  const Eigen::VectorXd exy_o = second_obs.block(1, 0, p, 1);
  const Eigen::VectorXd exy_e = second_shifted.block(1, 0, p, 1);

  q.g_diff = SymMatrix(exx_e - exx_o);
  q.g_sum = SymMatrix(exx_e + exx_o);
  q.z_diff = exy_e - exy_o;
  q.z_plus = exy_e + exy_o;
  q.y2_sum = second_shifted(0, 0) + second_obs(0, 0);
  q.var_y_shifted = second_shifted(0, 0);
  q.var_y_obs = second_obs(0, 0);
  q.max_var_x_shifted = exx_e.diagonal().maxCoeff();
  q.max_var_x_obs = exx_o.diagonal().maxCoeff();

  if (psd_rank(q.g_sum) == p) {
    q.beta_ols = solve_spd(q.g_sum, q.z_plus);
  } else {
    q.beta_ols = pinv_psd(q.g_sum).mat() * q.z_plus;  // minimum-norm minimizer
  }
  q.rsum_min = q.y2_sum - q.beta_ols.dot(q.z_plus);

  q.identity_covariances =
      noise.cov.mat() == Eigen::MatrixXd::Identity(p + 1, p + 1) &&
      shift.cov.mat() == Eigen::MatrixXd::Identity(p, p);
  return q;
}

/// Population risk difference: the quadratic form (beta - beta_pa)^T g_diff
/// (beta - beta_pa), nonnegative since g_diff is PSD.
inline double population_rdiff(const PopulationQuantities& q, const Eigen::VectorXd& beta) {
  if (beta.size() != q.p()) throw InvalidInput("population_rdiff: beta dimension mismatch");
  const Eigen::VectorXd d = beta - q.beta_pa;
  return std::max(0.0, d.dot(q.g_diff.mat() * d));
}

/// Population pooled risk: excess quadratic form around beta_ols plus the
/// irreducible pooled risk rsum_min.
inline double population_rsum(const PopulationQuantities& q, const Eigen::VectorXd& beta) {
  if (beta.size() != q.p()) throw InvalidInput("population_rsum: beta dimension mismatch");
  const Eigen::VectorXd d = beta - q.beta_ols;
  return d.dot(q.g_sum.mat() * d) + q.rsum_min;
}

/// Worst risk over shifts at most (1+tau)-times stronger, via the pooled-risk /
/// risk-difference decomposition evaluated through the moment matrices.
inline double worst_risk_decomposition(const PopulationQuantities& q,
                                       const Eigen::VectorXd& beta, double tau) {
  return 0.5 * population_rsum(q, beta) + 0.5 * (1.0 + 2.0 * tau) * population_rdiff(q, beta);
}

namespace detail {

// Closed-form route for unit noise and unit shift covariance: everything is
// expressed through the total-effect matrix and beta_ch. Steps:
//   h     = M^T beta_pa
//   g     = (beta_ch beta_ch^T + 3/2 I)^{-1} beta_ch
//   m     = h + g                      (= M^T beta_ols)
//   b     = M^T beta
//   delta = b - m
//   rsum  = 2 (beta_ch . delta)^2 + 3 |delta|^2 + (2 - 2 beta_ch . g)
//   rdiff = |b - h|^2
//   out   = rsum/2 + (1 + 2 tau)/2 * rdiff
// The additive term in rsum is the irreducible pooled risk, so the output is
// the worst risk itself rather than the excess over the pooled minimizer.
inline double worst_risk_unit_covariance(const PopulationQuantities& q,
                                         const Eigen::VectorXd& beta, double tau) {
  const int p = q.p();
  const Eigen::VectorXd h = q.total_effect.transpose() * q.beta_pa;
  const SymMatrix gram(q.beta_ch * q.beta_ch.transpose() +
                       1.5 * Eigen::MatrixXd::Identity(p, p));
  const Eigen::VectorXd g = solve_spd(gram, q.beta_ch);
  const Eigen::VectorXd m = h + g;
  const Eigen::VectorXd b = q.total_effect.transpose() * beta;
  const Eigen::VectorXd delta = b - m;
  const double ch_delta = q.beta_ch.dot(delta);
  const double rsum =
      2.0 * ch_delta * ch_delta + 3.0 * delta.squaredNorm() + (2.0 - 2.0 * q.beta_ch.dot(g));
  const double rdiff = (b - h).squaredNorm();
  return 0.5 * rsum + 0.5 * (1.0 + 2.0 * tau) * rdiff;
}

}  // namespace detail

/// Worst risk over the (1+tau)-times-stronger shift set. Uses the closed-form
/// route when the generating covariances are both identity, otherwise the
/// generic second-moment expansion.
inline double population_worst_risk(const PopulationQuantities& q,
                                    const Eigen::VectorXd& beta, double tau) {
  if (beta.size() != q.p()) throw InvalidInput("population_worst_risk: beta dimension mismatch");
  if (tau < 0.0) throw InvalidInput("population_worst_risk: tau must be >= 0");
  if (q.identity_covariances) return detail::worst_risk_unit_covariance(q, beta, tau);
  return worst_risk_decomposition(q, beta, tau);
}

/// Population regularization-path point (g_sum + lambda g_diff)^{-1}
/// (z_plus + lambda z_diff); the infinity endpoint is the minimum-norm
/// solution of g_diff beta = z_diff (= beta_pa when g_diff is full rank).
inline Eigen::VectorXd population_beta_lambda(const PopulationQuantities& q,
                                              LambdaValue lambda) {
  if (lambda.is_infinite()) return pinv_psd(q.g_diff).mat() * q.z_diff;
  const SymMatrix system(q.g_sum.mat() + lambda.value() * q.g_diff.mat());
  return solve_spd(system, q.z_plus + lambda.value() * q.z_diff);
}

/// Brute-force oracle: empirical risk of beta under the sup-attaining shift,
/// i.e. the shift covariance scaled by (1+tau).
inline double monte_carlo_worst_risk(const SemStructure& structure, const NoiseSpec& noise,
                                     const ShiftSpec& shift, const Eigen::VectorXd& beta,
                                     double tau, long n_mc, std::uint64_t seed) {
  if (n_mc < 10000) throw InvalidInput("monte_carlo_worst_risk: n_mc must be >= 10^4");
  const ShiftSpec scaled{SymMatrix((1.0 + tau) * shift.cov.mat())};
  const Dataset d = sample_sem(structure, noise, scaled, n_mc, seed, "worst");
  return empirical_risk(d, beta);
}

/// Shift-only view used by selectors: the population risk difference needs just
/// g_diff and beta_pa, not the noise covariance.
struct PopulationShiftForm {
  SymMatrix g_diff;
  Eigen::VectorXd beta_pa;

  double rdiff(const Eigen::VectorXd& beta) const {
    const Eigen::VectorXd d = beta - beta_pa;
    return std::max(0.0, d.dot(g_diff.mat() * d));
  }
};

inline PopulationShiftForm population_shift_form(const SemStructure& structure,
                                                 const ShiftSpec& shift) {
  const SemStructure s = validate_structure(structure);
  const int p = s.p();
  if (shift.cov.dim() != p) throw InvalidInput("population_shift_form: shift covariance is not p x p");
  const Eigen::MatrixXd solve = (Eigen::MatrixXd::Identity(p + 1, p + 1) - s.assemble())
                                    .fullPivLu()
                                    .inverse();
  const Eigen::MatrixXd m = solve.block(1, 1, p, p);
  return PopulationShiftForm{SymMatrix(m * shift.cov.mat() * m.transpose()), s.beta_pa};
}

}  // namespace causalreg
