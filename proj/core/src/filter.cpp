#include "bate/filter.hpp"

#include <algorithm>
#include <cmath>

#include "bate/errors.hpp"
#include "bate/linalg.hpp"

namespace bate {

int state_dim(FilterMode mode) {
  return mode == FilterMode::bearing_angle ? 7 : 6;
}

FilterState make_filter_state(const TargetState& initial, double initial_covariance,
                              FilterMode mode, double t0) {
  if (!(initial_covariance > 0.0)) {
    throw ConfigError("initial covariance must be positive");
  }
  FilterState s;
  s.mode = mode;
  const int n = state_dim(mode);
  s.x = Eigen::VectorXd::Zero(n);
  s.x.segment<3>(0) = initial.position;
  s.x.segment<3>(3) = initial.velocity;
  if (mode == FilterMode::bearing_angle) s.x(6) = initial.size;
  s.P = initial_covariance * Eigen::MatrixXd::Identity(n, n);
  s.time = t0;
  return s;
}

Eigen::MatrixXd transition_matrix(double dt) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(7, 7);
  f.block<3, 3>(0, 3) = dt * Eigen::Matrix3d::Identity();
  return f;
}

Eigen::MatrixXd process_noise(double sigma_v, double sigma_ell) {
  Eigen::VectorXd d(7);
  d << 0.0, 0.0, 0.0, sigma_v * sigma_v, sigma_v * sigma_v, sigma_v * sigma_v,
      sigma_ell * sigma_ell;
  return d.asDiagonal();
}

Eigen::MatrixXd measurement_matrix(const Eigen::Vector3d& bearing, double theta) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(6, 7);
  h.block<3, 3>(0, 0) = projection_matrix(bearing);
  h.block<3, 3>(3, 0) = theta * Eigen::Matrix3d::Identity();
  h.block<3, 1>(3, 6) = -bearing;
  return h;
}

Eigen::MatrixXd measurement_matrix_bearing_only(const Eigen::Vector3d& bearing) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 6);
  h.block<3, 3>(0, 0) = projection_matrix(bearing);
  return h;
}

FilterState predict(const FilterState& state, const FilterConfig& cfg) {
  const int n = state_dim(state.mode);
  if (state.x.size() != n) throw ConfigError("filter state size does not match mode");
  const Eigen::MatrixXd f7 = transition_matrix(cfg.dt);
  const Eigen::MatrixXd q7 = process_noise(cfg.sigma_v, cfg.sigma_ell);
  const Eigen::MatrixXd f = f7.topLeftCorner(n, n);
  const Eigen::MatrixXd q = q7.topLeftCorner(n, n);
  FilterState out = state;
  out.x = f * state.x;
  out.P = symmetrize(f * state.P * f.transpose() + q);
  out.time = state.time + cfg.dt;
  return out;
}

PseudoMeasurement build_pseudo_measurement(const Measurement& meas,
                                           const Eigen::Vector3d& observer_position,
                                           double range_estimate,
                                           const FilterConfig& cfg) {
  if (!(meas.angle > 0.0) || !(meas.angle < M_PI / 2.0)) {
    throw ConfigError("measured angle must lie in (0, pi/2)");
  }
  if (!std::isfinite(range_estimate) || !(range_estimate > 0.0)) {
    throw ConfigError("range estimate must be positive");
  }
  const double r = std::max(range_estimate, cfg.min_range);
  const Eigen::Matrix3d pg = projection_matrix(meas.bearing);

  PseudoMeasurement pm;
  if (cfg.mode == FilterMode::bearing_angle) {
    pm.z = Eigen::VectorXd(6);
    pm.z.head<3>() = pg * observer_position;
    pm.z.tail<3>() = meas.angle * observer_position;
    pm.H = measurement_matrix(meas.bearing, meas.angle);
    // nu = E [mu; w], E = r [P_g 0; theta*I -g]; Sigma = E diag(s_mu^2 I, s_w^2) E^T.
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(6, 4);
    e.block<3, 3>(0, 0) = pg;
    e.block<3, 3>(3, 0) = meas.angle * Eigen::Matrix3d::Identity();
    e.block<3, 1>(3, 3) = -meas.bearing;
    e *= r;
    Eigen::VectorXd noise_diag(4);
    noise_diag << cfg.sigma_mu * cfg.sigma_mu, cfg.sigma_mu * cfg.sigma_mu,
        cfg.sigma_mu * cfg.sigma_mu, cfg.sigma_w * cfg.sigma_w;
    pm.noise_cov = e * noise_diag.asDiagonal() * e.transpose();
  } else {
    pm.z = pg * observer_position;
    pm.H = measurement_matrix_bearing_only(meas.bearing);
    pm.noise_cov = (r * r * cfg.sigma_mu * cfg.sigma_mu) * (pg * pg.transpose());
  }
  return pm;
}

FilterState update(const FilterState& state, const PseudoMeasurement& pm,
                   const FilterConfig& cfg) {
  if (pm.H.cols() != state.x.size() || pm.H.rows() != pm.z.size() ||
      pm.noise_cov.rows() != pm.z.size() || pm.noise_cov.cols() != pm.z.size()) {
    throw ConfigError("pseudo-measurement dimensions are inconsistent");
  }
  const Eigen::MatrixXd s = pm.H * state.P * pm.H.transpose() + pm.noise_cov;
  const Eigen::MatrixXd k = state.P * pm.H.transpose() * pseudo_inverse(s);
  FilterState out = state;
  out.x = state.x + k * (pm.z - pm.H * state.x);
  const Eigen::MatrixXd ikh =
      Eigen::MatrixXd::Identity(state.x.size(), state.x.size()) - k * pm.H;
  out.P = symmetrize(ikh * state.P);
  if (state.mode == FilterMode::bearing_angle && out.x.size() == 7) {
    out.x(6) = std::max(out.x(6), cfg.min_size);
  }
  if (!out.x.allFinite() || !out.P.allFinite()) {
    throw NumericError("filter update produced non-finite values");
  }
  return out;
}

FilterState step(const FilterState& state, const Measurement& meas,
                 const Eigen::Vector3d& observer_position, const FilterConfig& cfg) {
  if (state.mode != cfg.mode) throw ConfigError("filter state mode does not match config");
  const FilterState prior = predict(state, cfg);
  const double range =
      std::max((prior.position() - observer_position).norm(), cfg.min_range);
  const PseudoMeasurement pm =
      build_pseudo_measurement(meas, observer_position, range, cfg);
  return update(prior, pm, cfg);
}

}  // namespace bate
