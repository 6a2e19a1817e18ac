#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

#include "causalreg/errors.hpp"
#include "causalreg/linalg.hpp"
#include "causalreg/rng.hpp"

namespace causalreg {

/// Constant structure of a linear SEM over (Y, X): direct effects X -> Y
/// (beta_pa), downstream effects Y -> X (beta_ch) and X-internal interactions
/// (b_x). X coordinates are 1..p; Y is stored separately, never as column 0.
struct SemStructure {
  Eigen::VectorXd beta_pa;
  Eigen::VectorXd beta_ch;
  Eigen::MatrixXd b_x;

  int p() const { return static_cast<int>(beta_pa.size()); }

  // [[0, beta_pa^T], [beta_ch, b_x]], a (p+1)x(p+1) matrix
  Eigen::MatrixXd assemble() const {
    const int n = p();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + 1, n + 1);
    b.block(0, 1, 1, n) = beta_pa.transpose();
    b.block(1, 0, n, 1) = beta_ch;
    b.block(1, 1, n, n) = b_x;
    return b;
  }
};

struct NoiseSpec {
  SymMatrix cov;  // (p+1)x(p+1) covariance of (eps_Y, eps_X)

  static NoiseSpec identity(int p) { return {SymMatrix::identity(p + 1)}; }
  static NoiseSpec scaled_identity(int p, double scale) {
    return {SymMatrix(scale * Eigen::MatrixXd::Identity(p + 1, p + 1))};
  }
};

struct ShiftSpec {
  SymMatrix cov;  // p x p covariance of the shift A; zero = observational

  static ShiftSpec none(int p) { return {SymMatrix::zero(p)}; }
  static ShiftSpec identity(int p) { return {SymMatrix::identity(p)}; }
  static ShiftSpec scaled_identity(int p, double scale) {
    return {SymMatrix(scale * Eigen::MatrixXd::Identity(p, p))};
  }
};

struct Dataset {
  Eigen::MatrixXd x;  // n x p
  Eigen::VectorXd y;  // n
  std::string label;

  long n() const { return static_cast<long>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }
};

inline void check_dataset(const Dataset& d) {
  if (d.x.rows() != d.y.size()) throw InvalidInput("dataset: row counts of x and y differ");
  if (d.x.rows() < 1) throw InvalidInput("dataset: needs at least one row");
  if (!d.x.allFinite() || !d.y.allFinite()) throw InvalidInput("dataset: non-finite entries");
}

struct EnvPair {
  Dataset obs;
  Dataset shifted;
};

inline void check_env_pair(const EnvPair& pair) {
  check_dataset(pair.obs);
  check_dataset(pair.shifted);
  if (pair.obs.p() != pair.shifted.p()) {
    throw InvalidInput("env pair: covariate counts differ across environments");
  }
}

/// Checks |det(I - B)| > 1e-12 so the SEM has a unique solution.
inline SemStructure validate_structure(SemStructure s) {
  const int p = s.p();
  if (s.beta_ch.size() != p || s.b_x.rows() != p || s.b_x.cols() != p) {
    throw InvalidInput("structure: inconsistent dimensions");
  }
  const Eigen::MatrixXd i_minus_b =
      Eigen::MatrixXd::Identity(p + 1, p + 1) - s.assemble();
  const double det = i_minus_b.fullPivLu().determinant();
  if (!(std::abs(det) > 1e-12)) throw SingularStructure("structure: I - B is singular");
  return s;
}

/// The six-covariate simulation-study structure:
/// X1 -> X2, X1 -> X3, X2 -> X3, {X2, X3} -> Y, Y -> {X4, X5}, X5 -> X6.
inline SemStructure benchmark_structure() {
  SemStructure s;
  s.beta_pa = Eigen::VectorXd::Zero(6);
  s.beta_pa(1) = 1.0;
  s.beta_pa(2) = 1.0;
  s.beta_ch = Eigen::VectorXd::Zero(6);
  s.beta_ch(3) = 1.0;
  s.beta_ch(4) = 1.0;
  s.b_x = Eigen::MatrixXd::Zero(6, 6);
  s.b_x(1, 0) = 1.0;
  s.b_x(2, 0) = 1.0;
  s.b_x(2, 1) = 1.0;
  s.b_x(5, 4) = 1.0;
  return validate_structure(s);
}

/// Draws n i.i.d. rows of the SEM solution (Y, X) = (I-B)^{-1} (eps + (0, A)),
/// eps ~ N(0, noise.cov), A ~ N(0, shift.cov) independent. Row i depends only
/// on (seed, i), so chunked or parallel generation reproduces bit-identically.
inline Dataset sample_sem(const SemStructure& structure, const NoiseSpec& noise,
                          const ShiftSpec& shift, long n, std::uint64_t seed,
                          std::string label = "env") {
  const SemStructure s = validate_structure(structure);
  const int p = s.p();
  if (noise.cov.dim() != p + 1) throw InvalidInput("sample_sem: noise covariance is not (p+1)x(p+1)");
  if (shift.cov.dim() != p) throw InvalidInput("sample_sem: shift covariance is not p x p");
  if (n < 1) throw InvalidInput("sample_sem: n must be >= 1");

  const Eigen::MatrixXd noise_root = psd_sqrt(noise.cov).mat();
  const Eigen::MatrixXd shift_root = psd_sqrt(shift.cov).mat();
  const Eigen::MatrixXd solve = (Eigen::MatrixXd::Identity(p + 1, p + 1) - s.assemble())
                                    .fullPivLu()
                                    .inverse();

  Dataset d;
  d.label = std::move(label);
  d.x.resize(n, p);
  d.y.resize(n);

  const CounterRng rng(seed);
  const std::uint64_t stride = static_cast<std::uint64_t>(2 * p + 1);
  Eigen::VectorXd z(p + 1), w(p), driver(p + 1), v(p + 1);
  for (long i = 0; i < n; ++i) {
    const std::uint64_t base = static_cast<std::uint64_t>(i) * stride;
    for (int j = 0; j <= p; ++j) z(j) = rng.gauss(base + static_cast<std::uint64_t>(j));
    for (int j = 0; j < p; ++j) {
      w(j) = rng.gauss(base + static_cast<std::uint64_t>(p + 1 + j));
    }
    driver.noalias() = noise_root * z;
    driver.tail(p).noalias() += shift_root * w;
    v.noalias() = solve * driver;
    d.y(i) = v(0);
    d.x.row(i) = v.tail(p).transpose();
  }
  return d;
}

/// Observational (A = 0) and shifted datasets of the same SEM, with seed
/// streams split per environment.
inline EnvPair sample_env_pair(const SemStructure& structure, const NoiseSpec& noise,
                               const ShiftSpec& shift, long n_obs, long n_shifted,
                               std::uint64_t seed) {
  EnvPair pair;
  pair.obs = sample_sem(structure, noise, ShiftSpec::none(structure.p()), n_obs,
                        derive_seed(seed, 1), "obs");
  pair.shifted =
      sample_sem(structure, noise, shift, n_shifted, derive_seed(seed, 2), "shifted");
  return pair;
}

}  // namespace causalreg
