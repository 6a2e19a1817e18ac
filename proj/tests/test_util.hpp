#pragma once

#include <Eigen/Dense>
#include <random>

namespace testutil {

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = normal(gen);
  }
  return m;
}

inline Eigen::VectorXd random_vector(int dim, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(gen);
  return v;
}

// PSD with the requested rank (almost surely), built as B B^T.
inline Eigen::MatrixXd random_psd(int dim, int rank, std::mt19937_64& gen) {
  if (rank == 0) return Eigen::MatrixXd::Zero(dim, dim);
  const Eigen::MatrixXd b = random_matrix(dim, rank, gen);
  return b * b.transpose();
}

}  // namespace testutil
