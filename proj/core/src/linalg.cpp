#include "bate/linalg.hpp"

#include <algorithm>
#include <limits>

namespace bate {

namespace {

double cutoff(const Eigen::MatrixXd& m, const Eigen::VectorXd& sv, double tol_scale) {
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double dim = static_cast<double>(std::max(m.rows(), m.cols()));
  return dim * sigma_max * std::numeric_limits<double>::epsilon() * tol_scale;
}

}  // namespace

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double tol_scale) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tol = cutoff(m, sv, tol_scale);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

RankAnalysis svd_rank(const Eigen::MatrixXd& m, double tol_scale) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  RankAnalysis out;
  out.singular_values = svd.singularValues();
  out.tolerance = cutoff(m, out.singular_values, tol_scale);
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values(i) > out.tolerance) ++out.rank;
  }
  const Eigen::Index dim = m.cols();
  out.null_basis = svd.matrixV().rightCols(dim - out.rank);
  return out;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace bate
