#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "causalreg/errors.hpp"
#include "causalreg/sem.hpp"

namespace causalreg {

/// Inputs of the Gaussian finite-sample bounds. Variances are population
/// values when known; plug_in marks that sample variances were used instead.
struct BoundInputs {
  int p = 0;
  long n_e = 0;
  long n_o = 0;
  double q = 1.0;  // tail parameter; nominal level 1 - 2 exp(-q)
  double var_y_e = 0;
  double var_y_o = 0;
  double max_var_x_e = 0;
  double max_var_x_o = 0;
  bool plug_in = false;
};

/// Concentration radius
/// var_y * max_k var_x_k * ( sqrt((4q + 8 log p)/n) + (4q + 8 log p)/n ).
inline double phi(int p, long n, double q, double var_y, double max_var_x) {
  if (p < 1 || n < 1 || !(q > 0.0)) throw InvalidInput("phi: requires p >= 1, n >= 1, q > 0");
  const double rate = (4.0 * q + 8.0 * std::log(static_cast<double>(p))) /
                      static_cast<double>(n);
  return var_y * max_var_x * (std::sqrt(rate) + rate);
}

/// Sum of the per-environment radii.
inline double phi_plus(const BoundInputs& in) {
  return phi(in.p, in.n_e, in.q, in.var_y_e, in.max_var_x_e) +
         phi(in.p, in.n_o, in.q, in.var_y_o, in.max_var_x_o);
}

/// Plug-in inputs from data: per-environment sample variances (1/n, centered).
inline BoundInputs bound_inputs_from_pair(const EnvPair& pair, double q) {
  check_env_pair(pair);
  const auto sample_var = [](const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(v.size());
  };
  const auto max_col_var = [&](const Eigen::MatrixXd& x) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) best = std::max(best, sample_var(x.col(j)));
    return best;
  };
  BoundInputs in;
  in.p = pair.obs.p();
  in.n_e = pair.shifted.n();
  in.n_o = pair.obs.n();
  in.q = q;
  in.var_y_e = sample_var(pair.shifted.y);
  in.var_y_o = sample_var(pair.obs.y);
  in.max_var_x_e = max_col_var(pair.shifted.x);
  in.max_var_x_o = max_col_var(pair.obs.x);
  in.plug_in = true;
  return in;
}

/// (1/2) R_pred + ((1 + 2 tau)/2) |R_diff|, the data-driven part of the bound.
inline double bound_core(double r_pred_hat, double r_diff_hat, double tau) {
  return 0.5 * r_pred_hat + 0.5 * (1.0 + 2.0 * tau) * std::abs(r_diff_hat);
}

/// Upper bound on the worst population risk over (1+tau)-times-stronger
/// shifts: bound core plus slack (1+tau)(|beta|_1^2 + 1) phi_plus.
inline double worst_risk_bound(const BoundInputs& in, const Eigen::VectorXd& beta,
                               double r_pred_hat, double r_diff_hat, double tau) {
  const double l1 = beta.lpNorm<1>();
  const double eta = (1.0 + tau) * (l1 * l1 + 1.0) * phi_plus(in);
  return bound_core(r_pred_hat, r_diff_hat, tau) + eta;
}

/// Bound on the empirical risk of a fresh out-of-sample set of size n_new with
/// the extra concentration term for that set.
inline double sample_risk_bound(const BoundInputs& in, const Eigen::VectorXd& beta,
                                double r_pred_hat, double r_diff_hat, double tau,
                                long n_new, double var_y_new, double max_var_x_new) {
  const double l1 = beta.lpNorm<1>();
  const double eta = (l1 * l1 + 1.0) * ((1.0 + tau) * phi_plus(in) +
                                        phi(in.p, n_new, in.q, var_y_new, max_var_x_new));
  return bound_core(r_pred_hat, r_diff_hat, tau) + eta;
}

/// (sup risk - bound core) / ((1+tau)(|beta|_1^2 + 1)); vanishes at rate
/// n^{-1/2} as the samples grow.
inline double normalized_excess_risk(const Eigen::VectorXd& beta, double sup_risk,
                                     double core, double tau) {
  const double l1 = beta.lpNorm<1>();
  return (sup_risk - core) / ((1.0 + tau) * (l1 * l1 + 1.0));
}

}  // namespace causalreg
