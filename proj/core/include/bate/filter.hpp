#pragma once

#include <Eigen/Dense>

#include "bate/geometry.hpp"

namespace bate {

enum class FilterMode { bearing_angle, bearing_only };

/// Target truth or estimate: position, velocity, physical size.
struct TargetState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double size = 1.0;
};

struct FilterConfig {
  double dt = 0.02;
  double sigma_v = 1e-3;      // velocity random-walk intensity
  double sigma_ell = 1e-4;    // size random-walk intensity
  double sigma_mu = 0.01;     // bearing noise level assumed by the filter
  double sigma_w = 0.01;      // angle noise level assumed by the filter
  FilterMode mode = FilterMode::bearing_angle;
  double min_size = 0.01;     // size estimate clamp applied after updates
  double min_range = 0.1;     // floor for the range used in the noise mapping
};

/// Augmented state [p; v; l] (7) in bearing_angle mode, [p; v] (6) in
/// bearing_only mode. P stays symmetric within 1e-9 and PSD.
struct FilterState {
  Eigen::VectorXd x;
  Eigen::MatrixXd P;
  double time = 0.0;
  FilterMode mode = FilterMode::bearing_angle;

  Eigen::Vector3d position() const { return x.segment<3>(0); }
  Eigen::Vector3d velocity() const { return x.segment<3>(3); }
  double size() const { return x(6); }
};

/// Pseudo-linear measurement: z = H x + nu with noise covariance derived
/// from the physical bearing/angle noise through the range estimate.
struct PseudoMeasurement {
  Eigen::VectorXd z;
  Eigen::MatrixXd H;
  Eigen::MatrixXd noise_cov;
};

int state_dim(FilterMode mode);

FilterState make_filter_state(const TargetState& initial, double initial_covariance,
                              FilterMode mode, double t0 = 0.0);

/// Constant-velocity transition [I dt*I 0; 0 I 0; 0 0 1] (7x7).
Eigen::MatrixXd transition_matrix(double dt);

/// Process noise diag(0, 0, 0, sv^2, sv^2, sv^2, sl^2) (7x7).
Eigen::MatrixXd process_noise(double sigma_v, double sigma_ell);

/// Measurement matrix for the augmented state,
/// H = [P_g 0 0; theta*I 0 -g] (6x7).
Eigen::MatrixXd measurement_matrix(const Eigen::Vector3d& bearing, double theta);

/// Bearing block only, H = [P_g 0] (3x6).
Eigen::MatrixXd measurement_matrix_bearing_only(const Eigen::Vector3d& bearing);

FilterState predict(const FilterState& state, const FilterConfig& cfg);

/// Builds z, H and the mapped noise covariance from one measurement.
/// range_estimate is the prior-based range ||p_hat - p_o|| (floored by the
/// caller or via cfg.min_range here).
PseudoMeasurement build_pseudo_measurement(const Measurement& meas,
                                           const Eigen::Vector3d& observer_position,
                                           double range_estimate,
                                           const FilterConfig& cfg);

/// Kalman update with a pseudoinverse in the gain (the innovation covariance
/// is singular by construction). Covariance is symmetrized; the size estimate
/// is clamped to cfg.min_size in bearing_angle mode.
FilterState update(const FilterState& state, const PseudoMeasurement& pm,
                   const FilterConfig& cfg);

/// predict + build_pseudo_measurement (range from the prior) + update.
FilterState step(const FilterState& state, const Measurement& meas,
                 const Eigen::Vector3d& observer_position, const FilterConfig& cfg);

}  // namespace bate
