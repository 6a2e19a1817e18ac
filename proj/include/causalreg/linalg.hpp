#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <utility>

#include "causalreg/errors.hpp"

namespace causalreg {

/// Symmetric real matrix; symmetrized as (A + A^T)/2 on construction so the
/// invariant entries(i,j) == entries(j,i) holds exactly.
class SymMatrix {
 public:
  SymMatrix() : m_(0, 0) {}

  explicit SymMatrix(Eigen::MatrixXd a) {
    if (a.rows() != a.cols()) throw InvalidInput("SymMatrix requires a square matrix");
    m_ = ((a + a.transpose()) / 2.0).eval();
  }

  static SymMatrix identity(int dim) { return SymMatrix(Eigen::MatrixXd::Identity(dim, dim)); }
  static SymMatrix zero(int dim) { return SymMatrix(Eigen::MatrixXd::Zero(dim, dim)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

struct EigenPair {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns, orthonormal, aligned with values
};

constexpr double kAlwaysClip = std::numeric_limits<double>::infinity();

struct ClipStats {
  int clipped = 0;           // eigenvalues zeroed from below
  double most_negative = 0;  // most negative eigenvalue seen
};

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
inline EigenPair sym_eigen(const SymMatrix& a) {
  if (!a.mat().allFinite()) throw InvalidInput("sym_eigen: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.mat());
  if (solver.info() != Eigen::Success) throw NumericError("sym_eigen: factorization failed");
  const int n = a.dim();
  EigenPair out;
  out.values = solver.eigenvalues().reverse();
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  return out;
}

namespace detail {

// Shared clipping rule: eigenvalues in [-clip_tol*scale, 0) are zeroed, where
// scale = max(1, |w_max|); anything more negative exceeds the tolerance.
inline Eigen::VectorXd clip_eigenvalues(const Eigen::VectorXd& w, double clip_tol,
                                        ClipStats* stats) {
  const double w_max = w.size() > 0 ? w(0) : 0.0;
  const double scale = std::max(1.0, std::abs(w_max));
  Eigen::VectorXd out = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < 0.0) {
      if (std::isfinite(clip_tol) && w(i) < -clip_tol * scale) {
        throw NotPositiveSemidefinite("eigenvalue below -clip_tol*scale");
      }
      if (stats) {
        ++stats->clipped;
        stats->most_negative = std::min(stats->most_negative, w(i));
      }
      out(i) = 0.0;
    }
  }
  return out;
}

inline SymMatrix reassemble(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& values) {
  return SymMatrix(vectors * values.asDiagonal() * vectors.transpose());
}

}  // namespace detail

/// Default numerical-rank tolerance, relative to the largest eigenvalue.
inline double default_rank_tol(int dim) {
  return static_cast<double>(dim) * std::numeric_limits<double>::epsilon();
}

/// Zeroes negative eigenvalues within tolerance; throws NotPositiveSemidefinite
/// beyond it. clip_tol = kAlwaysClip clips unconditionally.
inline SymMatrix clip_psd(const SymMatrix& a, double clip_tol = kAlwaysClip,
                          ClipStats* stats = nullptr) {
  const EigenPair ep = sym_eigen(a);
  return detail::reassemble(ep.vectors, detail::clip_eigenvalues(ep.values, clip_tol, stats));
}

/// PSD square root S with S*S == clip(a) and range(S) == range(clip(a)).
inline SymMatrix psd_sqrt(const SymMatrix& a, double clip_tol = kAlwaysClip,
                          ClipStats* stats = nullptr) {
  const EigenPair ep = sym_eigen(a);
  const Eigen::VectorXd w = detail::clip_eigenvalues(ep.values, clip_tol, stats);
  return detail::reassemble(ep.vectors, w.cwiseSqrt());
}

/// Moore-Penrose pseudo-inverse of a (near-)PSD matrix; eigenvalues at or below
/// rank_tol * w_max count as zero (negatives are always treated as zero).
inline SymMatrix pinv_psd(const SymMatrix& a, double rank_tol = -1.0) {
  if (rank_tol < 0.0) rank_tol = default_rank_tol(a.dim());
  const EigenPair ep = sym_eigen(a);
  const double w_max = ep.values.size() > 0 ? std::max(ep.values(0), 0.0) : 0.0;
  const double threshold = rank_tol * w_max;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ep.values.size());
  for (Eigen::Index i = 0; i < ep.values.size(); ++i) {
    if (ep.values(i) > threshold) inv(i) = 1.0 / ep.values(i);
  }
  return detail::reassemble(ep.vectors, inv);
}

/// Numerical rank under the same threshold rule as pinv_psd.
inline int psd_rank(const SymMatrix& a, double rank_tol = -1.0) {
  if (rank_tol < 0.0) rank_tol = default_rank_tol(a.dim());
  const EigenPair ep = sym_eigen(a);
  const double w_max = ep.values.size() > 0 ? std::max(ep.values(0), 0.0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < ep.values.size(); ++i) {
    if (ep.values(i) > rank_tol * w_max) ++rank;
  }
  return rank;
}

/// Solves a*x = b for symmetric positive definite a.
inline Eigen::VectorXd solve_spd(const SymMatrix& a, const Eigen::VectorXd& b,
                                 double rank_tol = -1.0) {
  if (a.dim() != b.size()) throw InvalidInput("solve_spd: dimension mismatch");
  if (rank_tol < 0.0) rank_tol = default_rank_tol(a.dim());
  const EigenPair ep = sym_eigen(a);
  const double w_max = ep.values.size() > 0 ? std::max(ep.values(0), 0.0) : 0.0;
  const double w_min = ep.values.size() > 0 ? ep.values(ep.values.size() - 1) : 0.0;
  if (w_max <= 0.0 || w_min <= rank_tol * w_max) {
    throw SingularSystem("solve_spd: matrix singular at tolerance");
  }
  return ep.vectors * ep.values.cwiseInverse().asDiagonal() *
         (ep.vectors.transpose() * b);
}

}  // namespace causalreg
