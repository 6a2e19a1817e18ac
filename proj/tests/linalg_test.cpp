#include "causalreg/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_util.hpp"

using namespace causalreg;

namespace {

Eigen::MatrixXd diag2(double a, double b) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

TEST(SymMatrix, SymmetrizesOnConstruction) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 2.0, 4.0, 3.0;
  const SymMatrix s(a);
  EXPECT_DOUBLE_EQ(s(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(s(0, 1), s(1, 0));
}

TEST(SymMatrix, RejectsNonSquare) {
  EXPECT_THROW(SymMatrix(Eigen::MatrixXd::Zero(2, 3)), InvalidInput);
}

TEST(SymEigen, Identity) {
  const EigenPair ep = sym_eigen(SymMatrix::identity(3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(ep.values(i), 1.0, 1e-14);
}

TEST(SymEigen, DiagonalSortedDescendingWithAxisVectors) {
  const EigenPair ep = sym_eigen(SymMatrix(diag2(1.0, 4.0)));
  EXPECT_NEAR(ep.values(0), 4.0, 1e-14);
  EXPECT_NEAR(ep.values(1), 1.0, 1e-14);
  // eigenvectors are a signed axis permutation
  EXPECT_NEAR(std::abs(ep.vectors(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(ep.vectors(0, 1)), 1.0, 1e-14);
}

TEST(SymEigen, ReconstructsRandomPsd) {
  std::mt19937_64 gen(7);
  const SymMatrix a(testutil::random_psd(5, 5, gen));
  const EigenPair ep = sym_eigen(a);
  const Eigen::MatrixXd rebuilt =
      ep.vectors * ep.values.asDiagonal() * ep.vectors.transpose();
  const double tol = 1e-10 * std::max(1.0, a.mat().cwiseAbs().maxCoeff());
  EXPECT_LT((rebuilt - a.mat()).cwiseAbs().maxCoeff(), tol);
}

TEST(SymEigen, RejectsNonFinite) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sym_eigen(SymMatrix(a)), InvalidInput);
}

TEST(PsdSqrt, Diagonal) {
  const SymMatrix s = psd_sqrt(SymMatrix(diag2(4.0, 9.0)));
  EXPECT_NEAR(s(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(s(1, 1), 3.0, 1e-12);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-12);
}

TEST(PsdSqrt, ZeroMatrix) {
  const SymMatrix s = psd_sqrt(SymMatrix::zero(3));
  EXPECT_EQ(s.mat(), Eigen::MatrixXd::Zero(3, 3));
}

TEST(PsdSqrt, RankTwoReconstructionAndRank) {
  std::mt19937_64 gen(21);
  const SymMatrix a(testutil::random_psd(4, 2, gen));
  const SymMatrix s = psd_sqrt(a);
  EXPECT_LT((s.mat() * s.mat() - a.mat()).cwiseAbs().maxCoeff(),
            1e-8 * std::max(1.0, a.mat().cwiseAbs().maxCoeff()));
  EXPECT_EQ(psd_rank(s), 2);
  EXPECT_EQ(psd_rank(a), 2);
}

TEST(PsdSqrt, SquareEqualsClipProperty) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + static_cast<int>(gen() % 6);
    const int rank = static_cast<int>(gen() % (static_cast<unsigned>(dim) + 1));
    const SymMatrix a(testutil::random_psd(dim, rank, gen));
    const SymMatrix s = psd_sqrt(a);
    const SymMatrix clipped = clip_psd(a);
    const double scale = std::max(1.0, a.mat().cwiseAbs().maxCoeff());
    EXPECT_LT((s.mat() * s.mat() - clipped.mat()).cwiseAbs().maxCoeff(), 1e-8 * scale);
  }
}

TEST(PsdSqrt, ClipToleranceBoundary) {
  // eigenvalues {1, -0.5}: within a loose tolerance the negative one is
  // zeroed, beyond a tight one the input is rejected
  Eigen::MatrixXd a = diag2(1.0, -0.5);
  ClipStats stats;
  const SymMatrix s = psd_sqrt(SymMatrix(a), 0.6, &stats);
  EXPECT_EQ(stats.clipped, 1);
  EXPECT_DOUBLE_EQ(stats.most_negative, -0.5);
  EXPECT_NEAR(s(1, 1), 0.0, 1e-14);
  EXPECT_THROW(psd_sqrt(SymMatrix(a), 0.4), NotPositiveSemidefinite);
  EXPECT_NO_THROW(psd_sqrt(SymMatrix(a)));  // default clips unconditionally
}

TEST(PinvPsd, DiagonalWithNullDirection) {
  const SymMatrix r = pinv_psd(SymMatrix(diag2(2.0, 0.0)));
  EXPECT_NEAR(r(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(r(1, 1), 0.0, 1e-14);
}

TEST(PinvPsd, Identity) {
  const SymMatrix r = pinv_psd(SymMatrix::identity(4));
  EXPECT_LT((r.mat() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PinvPsd, MoorePenroseConditionsAcrossRanks) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + static_cast<int>(gen() % 6);
    const int rank = static_cast<int>(gen() % (static_cast<unsigned>(dim) + 1));
    const Eigen::MatrixXd a = testutil::random_psd(dim, rank, gen);
    const Eigen::MatrixXd g = pinv_psd(SymMatrix(a)).mat();
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    EXPECT_LT((a * g * a - a).cwiseAbs().maxCoeff(), 1e-8 * scale) << "A A+ A == A";
    const double gscale = std::max(1.0, g.cwiseAbs().maxCoeff());
    EXPECT_LT((g * a * g - g).cwiseAbs().maxCoeff(), 1e-8 * gscale) << "A+ A A+ == A+";
    const Eigen::MatrixXd ag = a * g;
    const Eigen::MatrixXd ga = g * a;
    EXPECT_LT((ag - ag.transpose()).cwiseAbs().maxCoeff(), 1e-8) << "(A A+)^T == A A+";
    EXPECT_LT((ga - ga.transpose()).cwiseAbs().maxCoeff(), 1e-8) << "(A+ A)^T == A+ A";
  }
}

TEST(PinvPsd, DoubleInverseReturnsClip) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + static_cast<int>(gen() % 5);
    const int rank = 1 + static_cast<int>(gen() % static_cast<unsigned>(dim));
    const SymMatrix a(testutil::random_psd(dim, rank, gen));
    const SymMatrix back = pinv_psd(pinv_psd(a));
    const double scale = std::max(1.0, a.mat().cwiseAbs().maxCoeff());
    EXPECT_LT((back.mat() - clip_psd(a).mat()).cwiseAbs().maxCoeff(), 1e-8 * scale);
  }
}

TEST(PinvPsd, FullRankGivesInverse) {
  std::mt19937_64 gen(17);
  const SymMatrix a(testutil::random_psd(5, 5, gen));
  const Eigen::MatrixXd prod = pinv_psd(a).mat() * a.mat();
  EXPECT_LT((prod - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveSpd, Identity) {
  Eigen::VectorXd b(2);
  b << 1.0, 2.0;
  const Eigen::VectorXd x = solve_spd(SymMatrix::identity(2), b);
  EXPECT_NEAR(x(0), 1.0, 1e-14);
  EXPECT_NEAR(x(1), 2.0, 1e-14);
}

TEST(SolveSpd, Diagonal) {
  Eigen::VectorXd b(2);
  b << 2.0, 4.0;
  const Eigen::VectorXd x = solve_spd(SymMatrix(diag2(2.0, 4.0)), b);
  EXPECT_NEAR(x(0), 1.0, 1e-14);
  EXPECT_NEAR(x(1), 1.0, 1e-14);
}

TEST(SolveSpd, MatchesExplicitInverseOnRandomSpd) {
  std::mt19937_64 gen(29);
  const Eigen::MatrixXd a =
      testutil::random_psd(6, 6, gen) + Eigen::MatrixXd::Identity(6, 6);
  const Eigen::VectorXd b = testutil::random_vector(6, gen);
  const Eigen::VectorXd x = solve_spd(SymMatrix(a), b);
  EXPECT_LE((a * x - b).norm(), 1e-8 * (b.norm() + 1.0));
  const Eigen::VectorXd oracle = a.inverse() * b;
  EXPECT_LT((x - oracle).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveSpd, SingularThrows) {
  Eigen::VectorXd b(2);
  b << 1.0, 1.0;
  EXPECT_THROW(solve_spd(SymMatrix(diag2(1.0, 0.0)), b), SingularSystem);
  EXPECT_THROW(solve_spd(SymMatrix::zero(2), b), SingularSystem);
}

TEST(SolveSpd, DimensionMismatchThrows) {
  EXPECT_THROW(solve_spd(SymMatrix::identity(3), Eigen::VectorXd::Zero(2)), InvalidInput);
}

}  // namespace
