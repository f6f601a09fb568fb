#pragma once

#include <vector>

#include <Eigen/Dense>

namespace bate {

/// Vector polynomial p(t) = sum_j coefficients[j] * t^j. `order` is the
/// nominal motion order n; coefficients may extend past it (the excess terms
/// are the higher-order motion the observability analyses key on).
struct PolynomialMotion {
  int order = 0;
  std::vector<Eigen::Vector3d> coefficients;
};

struct KinematicSample {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d acceleration = Eigen::Vector3d::Zero();
};

/// Analytic evaluation (position, velocity, acceleration) at time t.
KinematicSample eval_polynomial_motion(const PolynomialMotion& motion, double t);

/// True when any coefficient past index `target_order` has norm above tol.
bool has_excess_order(const PolynomialMotion& motion, int target_order,
                      double tol = 1e-12);

}  // namespace bate
