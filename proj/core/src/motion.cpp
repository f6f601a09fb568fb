#include "bate/motion.hpp"

#include "bate/errors.hpp"

namespace bate {

KinematicSample eval_polynomial_motion(const PolynomialMotion& motion, double t) {
  if (motion.coefficients.empty()) {
    throw ConfigError("polynomial motion needs at least one coefficient");
  }
  if (motion.order < 0) throw ConfigError("polynomial motion order must be >= 0");
  KinematicSample out;
  // Horner evaluation, highest power first.
  for (auto it = motion.coefficients.rbegin(); it != motion.coefficients.rend(); ++it) {
    out.acceleration = out.acceleration * t + out.velocity * 2.0;
    out.velocity = out.velocity * t + out.position;
    out.position = out.position * t + *it;
  }
  return out;
}

bool has_excess_order(const PolynomialMotion& motion, int target_order, double tol) {
  for (size_t j = static_cast<size_t>(target_order) + 1; j < motion.coefficients.size(); ++j) {
    if (motion.coefficients[j].norm() > tol) return true;
  }
  return false;
}

}  // namespace bate
