#include "bate/observability.hpp"

#include <cmath>
#include <string>

#include "bate/errors.hpp"
#include "bate/filter.hpp"

namespace bate {

void validate_window(const ObservationWindow& window) {
  const size_t k = window.times.size();
  if (k < 2) {
    throw InsufficientObservationsError("observation window needs at least 2 samples", 2,
                                        static_cast<int>(k));
  }
  if (window.bearings.size() != k || window.angles.size() != k ||
      window.observer_positions.size() != k) {
    throw ConfigError("observation window lists have mismatched lengths");
  }
  const double dt = window.times[1] - window.times[0];
  if (!(dt > 0.0)) throw ConfigError("observation times must be strictly increasing");
  for (size_t i = 1; i < k; ++i) {
    const double step = window.times[i] - window.times[i - 1];
    if (std::abs(step - dt) > 1e-9) {
      throw ConfigError("observation times must be uniformly spaced");
    }
  }
  for (size_t i = 0; i < k; ++i) {
    if (std::abs(window.bearings[i].norm() - 1.0) > 1e-9) {
      throw ConfigError("window bearing " + std::to_string(i) + " is not unit length");
    }
    if (!(window.angles[i] > 0.0)) {
      throw ConfigError("window angle " + std::to_string(i) + " must be positive");
    }
  }
}

Eigen::MatrixXd build_observability_matrix(const ObservationWindow& window) {
  validate_window(window);
  const int k = window.size();
  const double dt = window.dt();
  Eigen::MatrixXd q(6 * k, 7);
  for (int i = 0; i < k; ++i) {
    const Eigen::MatrixXd h = measurement_matrix(window.bearings[i], window.angles[i]);
    q.middleRows(6 * i, 6) = h * transition_matrix(i * dt);
  }
  return q;
}

ObservabilityReport analyze_rank(const Eigen::MatrixXd& m, int full_dim) {
  const RankAnalysis ra = svd_rank(m, 100.0);
  ObservabilityReport report;
  report.rank = ra.rank;
  report.full_dim = full_dim;
  report.observable = ra.rank >= full_dim;
  report.singular_values = ra.singular_values;
  report.null_basis = ra.null_basis;
  report.tolerance = ra.tolerance;
  return report;
}

std::vector<Eigen::Vector3d> fit_polynomial(const std::vector<double>& times,
                                            const std::vector<Eigen::Vector3d>& values,
                                            int order) {
  const int k = static_cast<int>(times.size());
  if (order < 0) throw ConfigError("polynomial fit order must be >= 0");
  if (k < order + 1 || values.size() != times.size()) {
    throw ConfigError("polynomial fit needs at least order+1 samples");
  }
  Eigen::MatrixXd vand(k, order + 1);
  for (int i = 0; i < k; ++i) {
    double p = 1.0;
    for (int j = 0; j <= order; ++j) {
      vand(i, j) = p;
      p *= times[i];
    }
  }
  Eigen::MatrixXd rhs(k, 3);
  for (int i = 0; i < k; ++i) rhs.row(i) = values[i].transpose();
  const Eigen::MatrixXd sol =
      vand.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  std::vector<Eigen::Vector3d> coeffs(order + 1);
  for (int j = 0; j <= order; ++j) coeffs[j] = sol.row(j).transpose();
  return coeffs;
}

StackedSystem stack_discrete_system(const ObservationWindow& window, int target_order) {
  validate_window(window);
  if (target_order < 0) throw ConfigError("target order must be >= 0");
  const int n = target_order;
  const int k = window.size();
  if (k < n + 2) {
    throw InsufficientObservationsError(
        "under-determined: recovering order-" + std::to_string(n) +
            " motion plus size needs at least " + std::to_string(n + 2) + " observations",
        n + 2, k);
  }

  StackedSystem sys;
  sys.target_order = n;
  sys.t_origin = window.times[0];
  std::vector<double> t(k);
  for (int i = 0; i < k; ++i) t[i] = window.times[i] - sys.t_origin;

  sys.observer_fit = fit_polynomial(t, window.observer_positions, n);

  sys.a = Eigen::MatrixXd::Zero(3 * k, 3 * (n + 1) + 1);
  sys.h = Eigen::VectorXd(3 * k);
  for (int i = 0; i < k; ++i) {
    double p = 1.0;
    for (int j = 0; j <= n; ++j) {
      sys.a.block<3, 3>(3 * i, 3 * j) = p * Eigen::Matrix3d::Identity();
      p *= t[i];
    }
    sys.a.block<3, 1>(3 * i, 3 * (n + 1)) = -window.bearings[i] / window.angles[i];

    Eigen::Vector3d fit = Eigen::Vector3d::Zero();
    double q = 1.0;
    for (int j = 0; j <= n; ++j) {
      fit += q * sys.observer_fit[j];
      q *= t[i];
    }
    sys.h.segment<3>(3 * i) = window.observer_positions[i] - fit;
  }
  return sys;
}

RecoveredSolution recover_motion(const StackedSystem& sys) {
  const int cols = static_cast<int>(sys.a.cols());
  const RankAnalysis ra = svd_rank(sys.a, 100.0);
  if (ra.rank < cols) {
    throw UnobservableError("stacked system is rank-deficient (observer lacks excess-order motion)",
                            ra.null_basis.col(ra.null_basis.cols() - 1));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd x = svd.solve(sys.h);

  RecoveredSolution sol;
  const int n = sys.target_order;
  sol.relative_coefficients.resize(n + 1);
  for (int j = 0; j <= n; ++j) sol.relative_coefficients[j] = x.segment<3>(3 * j);
  sol.size = x(3 * (n + 1));
  sol.residual_norm = (sys.a * x - sys.h).norm();
  sol.conditioning = ra.singular_values(0) / ra.singular_values(cols - 1);
  sol.observer_fit = sys.observer_fit;
  sol.t_origin = sys.t_origin;
  return sol;
}

std::vector<Eigen::Vector3d> recovered_target_coefficients(const RecoveredSolution& sol) {
  std::vector<Eigen::Vector3d> out(sol.relative_coefficients.size());
  for (size_t j = 0; j < out.size(); ++j) {
    out[j] = sol.relative_coefficients[j] + sol.observer_fit[j];
  }
  return out;
}

std::vector<Eigen::Vector3d> recovered_target_positions(const RecoveredSolution& sol,
                                                        const ObservationWindow& window) {
  std::vector<Eigen::Vector3d> out(window.times.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = window.observer_positions[i] +
             window.bearings[i] * (sol.size / window.angles[i]);
  }
  return out;
}

}  // namespace bate
