#pragma once

#include <Eigen/Dense>

namespace bate {

/// Moore-Penrose pseudoinverse via SVD. Singular values at or below
/// max(rows, cols) * sigma_max * machine-epsilon * tol_scale are truncated.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double tol_scale = 1.0);

struct RankAnalysis {
  int rank = 0;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd null_basis;  // columns span the (right) null space
  double tolerance = 0.0;
};

/// SVD rank with the same relative cutoff family as pseudo_inverse.
RankAnalysis svd_rank(const Eigen::MatrixXd& m, double tol_scale = 1.0);

/// (m + m^T) / 2.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

}  // namespace bate
