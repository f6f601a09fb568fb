#include "bate/sim.hpp"

#include <algorithm>
#include <cmath>

#include "bate/errors.hpp"
#include "bate/linalg.hpp"

namespace bate {

namespace {

constexpr double kMinRange = 1e-9;

Eigen::Vector3d bearing_between(const Eigen::Vector3d& observer,
                                const Eigen::Vector3d& target, double* range_out) {
  const Eigen::Vector3d s = target - observer;
  const double r = s.norm();
  if (r < kMinRange) throw NumericError("zero range between observer and target");
  if (range_out) *range_out = r;
  return s / r;
}

}  // namespace

Eigen::Vector3d NoiseSampler::unit_axis() {
  for (;;) {
    const Eigen::Vector3d v(gauss(), gauss(), gauss());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

double effective_size(const SizeProfile& profile, const Eigen::Vector3d& bearing,
                      double t) {
  if (!(profile.base_size > 0.0)) throw ConfigError("size profile base_size must be positive");
  switch (profile.kind) {
    case SizeProfile::Kind::constant:
      return profile.base_size;
    case SizeProfile::Kind::spinning_square: {
      const double azimuth = std::atan2(bearing.y(), bearing.x());
      const double phi = profile.spin_rate * t - azimuth;
      return profile.base_size * (std::abs(std::cos(phi)) + std::abs(std::sin(phi)));
    }
  }
  throw ConfigError("unknown size profile kind");
}

Eigen::Vector3d png_command(const KinematicSample& observer, const KinematicSample& target,
                            double gain, double speed, double dt) {
  if (!(speed > 0.0)) throw ConfigError("png speed must be positive");
  double r = 0.0;
  const Eigen::Vector3d g = bearing_between(observer.position, target.position, &r);
  const Eigen::Vector3d s = r * g;
  const Eigen::Vector3d rel_v = target.velocity - observer.velocity;
  const Eigen::Vector3d omega = s.cross(rel_v) / (r * r);  // LOS rate vector
  const double los_rate = omega.norm();
  const double closing = -s.dot(rel_v) / r;

  const double vnorm = observer.velocity.norm();
  if (vnorm < 1e-12) throw ConfigError("png needs a non-zero observer velocity");
  const Eigen::Vector3d dir = observer.velocity / vnorm;
  if (los_rate < 1e-15) return speed * dir;

  const double turn_rate = gain * los_rate * closing / speed;
  const Eigen::Vector3d axis = omega / los_rate;
  const Eigen::Matrix3d rot = axis_angle_rotation(axis, turn_rate * dt);
  return speed * (rot * dir).normalized();
}

Eigen::Vector3d range_tracking_command(const Eigen::Vector3d& observer_position,
                                       const KinematicSample& target,
                                       const GuidanceLaw& law,
                                       const Eigen::Vector3d& bearing) {
  const double r = (target.position - observer_position).norm();
  if (r < kMinRange) throw NumericError("zero range: guidance singularity");
  const double shape = (r * r - law.desired_range * law.desired_range) / (r * r);
  Eigen::Vector3d cmd = target.velocity + law.track_gain * shape * bearing;
  const double n = cmd.norm();
  if (n > law.speed_limit) cmd *= law.speed_limit / n;
  return cmd;
}

KinematicSample eval_trajectory(const AgentTrajectory& traj, double t) {
  if (const auto* poly = std::get_if<PolynomialMotion>(&traj)) {
    return eval_polynomial_motion(*poly, t);
  }
  if (const auto* circle = std::get_if<CircleScript>(&traj)) {
    const double a = circle->angular_rate * t + circle->phase;
    KinematicSample out;
    out.position = circle->center +
                   circle->radius * Eigen::Vector3d(std::cos(a), std::sin(a), 0.0);
    out.velocity = circle->radius * circle->angular_rate *
                   Eigen::Vector3d(-std::sin(a), std::cos(a), 0.0);
    out.acceleration = -circle->radius * circle->angular_rate * circle->angular_rate *
                       Eigen::Vector3d(std::cos(a), std::sin(a), 0.0);
    return out;
  }
  throw ConfigError("guided trajectories have no closed form; use run_scenario");
}

Measurement synthesize_measurement(const Eigen::Vector3d& target_position,
                                   double effective_size,
                                   const Eigen::Vector3d& observer_position,
                                   const NoiseModel& noise, AngleModel angle_model,
                                   NoiseSampler& sampler) {
  if (!(effective_size > 0.0)) throw ConfigError("target size must be positive");
  double r = 0.0;
  const Eigen::Vector3d g = bearing_between(observer_position, target_position, &r);
  const double theta = angle_model == AngleModel::exact
                           ? 2.0 * std::atan(effective_size / (2.0 * r))
                           : effective_size / r;

  // Fixed draw order keeps traces reproducible even when a sigma is zero.
  const Eigen::Vector3d axis = sampler.unit_axis();
  const double eps = noise.sigma_mu * sampler.gauss();
  const double w = noise.sigma_w * sampler.gauss();

  Measurement m;
  m.bearing = perturb_bearing(g, axis, eps);
  m.angle = std::clamp(theta + w, 1e-12, M_PI / 2.0 - 1e-12);
  return m;
}

ObservationWindow make_observation_window(const AgentTrajectory& target,
                                          const AgentTrajectory& observer, int samples,
                                          double dt, double target_size, double t0) {
  std::vector<Eigen::Vector3d> tp(samples), op(samples);
  for (int i = 0; i < samples; ++i) {
    const double t = t0 + i * dt;
    tp[i] = eval_trajectory(target, t).position;
    op[i] = eval_trajectory(observer, t).position;
  }
  return make_observation_window(tp, op, dt, target_size, t0);
}

ObservationWindow make_observation_window(const std::vector<Eigen::Vector3d>& target_positions,
                                          const std::vector<Eigen::Vector3d>& observer_positions,
                                          double dt, double target_size, double t0) {
  if (target_positions.size() != observer_positions.size()) {
    throw ConfigError("target/observer sample counts differ");
  }
  ObservationWindow w;
  const int k = static_cast<int>(target_positions.size());
  w.times.resize(k);
  w.bearings.resize(k);
  w.angles.resize(k);
  w.observer_positions = observer_positions;
  for (int i = 0; i < k; ++i) {
    w.times[i] = t0 + i * dt;
    double r = 0.0;
    w.bearings[i] = bearing_between(observer_positions[i], target_positions[i], &r);
    w.angles[i] = target_size / r;
  }
  validate_window(w);
  return w;
}

void validate_scenario(const ScenarioConfig& cfg) {
  if (!(cfg.duration > 0.0)) throw ConfigError("duration must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (cfg.runs < 1) throw ConfigError("runs must be >= 1");
  if (std::holds_alternative<GuidedMotion>(cfg.target)) {
    throw ConfigError("target trajectory cannot be guided");
  }
  if (const auto* guided = std::get_if<GuidedMotion>(&cfg.observer)) {
    if (guided->law.kind == GuidanceLaw::Kind::png &&
        guided->initial_velocity.norm() < 1e-12) {
      throw ConfigError("png guidance needs a non-zero initial observer velocity");
    }
  }
  if (!(cfg.size_profile.base_size > 0.0)) {
    throw ConfigError("size profile base_size must be positive");
  }
  if (!(cfg.filter.initial_size > 0.0)) throw ConfigError("initial size estimate must be positive");
  if (!(cfg.filter.initial_covariance > 0.0)) {
    throw ConfigError("initial covariance must be positive");
  }
  if (cfg.noise.sigma_mu < 0.0 || cfg.noise.sigma_w < 0.0) {
    throw ConfigError("noise sigmas must be non-negative");
  }
  if (cfg.stop_range < 0.0) throw ConfigError("stop_range must be non-negative");
}

FilterConfig make_filter_config(const ScenarioConfig& cfg, FilterMode mode) {
  FilterConfig out;
  out.dt = cfg.dt;
  out.sigma_v = cfg.filter.sigma_v;
  out.sigma_ell = cfg.filter.sigma_ell;
  out.sigma_mu = cfg.noise.sigma_mu;
  out.sigma_w = cfg.noise.sigma_w;
  out.mode = mode;
  out.min_size = cfg.filter.min_size;
  out.min_range = cfg.filter.min_range;
  return out;
}

double nees(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate,
            const Eigen::MatrixXd& covariance, bool* used_pseudoinverse) {
  if (truth.size() != estimate.size() || covariance.rows() != truth.size() ||
      covariance.cols() != truth.size()) {
    throw ConfigError("nees dimension mismatch");
  }
  const Eigen::VectorXd e = truth - estimate;
  if (used_pseudoinverse) *used_pseudoinverse = false;
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() == Eigen::Success) {
    const double v = e.dot(llt.solve(e));
    if (std::isfinite(v)) return v;
  }
  if (used_pseudoinverse) *used_pseudoinverse = true;
  return e.dot(pseudo_inverse(covariance) * e);
}

RunRecord run_scenario(const ScenarioConfig& cfg, uint64_t seed) {
  validate_scenario(cfg);
  const int total_steps = static_cast<int>(std::llround(cfg.duration / cfg.dt)) + 1;

  NoiseSampler sampler(seed);
  const FilterConfig ba_cfg = make_filter_config(cfg, FilterMode::bearing_angle);
  const FilterConfig bo_cfg = make_filter_config(cfg, FilterMode::bearing_only);
  const TargetState init{cfg.filter.initial_position, cfg.filter.initial_velocity,
                         cfg.filter.initial_size};
  FilterState ba = make_filter_state(init, cfg.filter.initial_covariance,
                                     FilterMode::bearing_angle);
  FilterState bo = make_filter_state(init, cfg.filter.initial_covariance,
                                     FilterMode::bearing_only);

  const auto* guided = std::get_if<GuidedMotion>(&cfg.observer);
  Eigen::Vector3d gp = Eigen::Vector3d::Zero();
  Eigen::Vector3d gv = Eigen::Vector3d::Zero();
  if (guided) {
    gp = guided->initial_position;
    gv = guided->initial_velocity;
    if (guided->law.kind == GuidanceLaw::Kind::png) {
      gv = guided->law.speed * gv.normalized();
    }
  }

  RunRecord rec;
  rec.seed = seed;
  rec.steps.reserve(total_steps);

  for (int k = 0; k < total_steps; ++k) {
    const double t = k * cfg.dt;
    const KinematicSample target = eval_trajectory(cfg.target, t);
    KinematicSample observer;
    if (guided) {
      observer.position = gp;
      observer.velocity = gv;
    } else {
      observer = eval_trajectory(cfg.observer, t);
    }

    double range = 0.0;
    Eigen::Vector3d g_true;
    try {
      g_true = bearing_between(observer.position, target.position, &range);
    } catch (const NumericError& err) {
      rec.failed = true;
      rec.failure_step = k;
      rec.failure_reason = err.what();
      break;
    }
    if (cfg.stop_range > 0.0 && range < cfg.stop_range) {
      rec.stopped_on_range = true;
      break;
    }

    const double ell = effective_size(cfg.size_profile, g_true, t);
    const Measurement meas = synthesize_measurement(
        target.position, ell, observer.position, cfg.noise, cfg.angle_model, sampler);

    try {
      if (k == 0) {
        // Update-only at t0: the prior is the configured initial estimate.
        const double r_ba = std::max((ba.position() - observer.position).norm(),
                                     ba_cfg.min_range);
        ba = update(ba, build_pseudo_measurement(meas, observer.position, r_ba, ba_cfg),
                    ba_cfg);
        const double r_bo = std::max((bo.position() - observer.position).norm(),
                                     bo_cfg.min_range);
        bo = update(bo, build_pseudo_measurement(meas, observer.position, r_bo, bo_cfg),
                    bo_cfg);
      } else {
        ba = step(ba, meas, observer.position, ba_cfg);
        bo = step(bo, meas, observer.position, bo_cfg);
      }
    } catch (const NumericError& err) {
      rec.failed = true;
      rec.failure_step = k;
      rec.failure_reason = err.what();
      break;
    }

    StepRecord sr;
    sr.t = t;
    sr.target_position = target.position;
    sr.target_velocity = target.velocity;
    sr.target_size = ell;
    sr.observer_position = observer.position;
    sr.observer_velocity = observer.velocity;
    sr.meas = meas;
    sr.ba_state = ba.x;
    sr.bo_state = bo.x;
    sr.ba_cov_diag = ba.P.diagonal();
    sr.bo_cov_diag = bo.P.diagonal();
    sr.ba_cov_trace = ba.P.trace();
    sr.bo_cov_trace = bo.P.trace();
    Eigen::VectorXd truth7(7);
    truth7 << target.position, target.velocity, ell;
    sr.ba_nees = nees(truth7, ba.x, ba.P);
    sr.bo_nees = nees(truth7.head<6>(), bo.x, bo.P);
    rec.steps.push_back(std::move(sr));

    if (guided) {
      try {
        if (guided->law.kind == GuidanceLaw::Kind::png) {
          gv = png_command(observer, target, guided->law.navigation_gain,
                           guided->law.speed, cfg.dt);
        } else {
          gv = range_tracking_command(gp, target, guided->law, g_true);
        }
      } catch (const NumericError& err) {
        rec.failed = true;
        rec.failure_step = k;
        rec.failure_reason = err.what();
        break;
      }
      gp += gv * cfg.dt;
    }
  }
  return rec;
}

MonteCarloSummary monte_carlo(const ScenarioConfig& cfg, int runs,
                              const std::function<void(int, const RunRecord&)>& sink) {
  validate_scenario(cfg);
  if (runs < 1) throw ConfigError("monte_carlo needs runs >= 1");

  MonteCarloSummary out;
  out.requested_runs = runs;

  size_t steps = 0;
  // Accumulators: [ba|bo] x [pos_sum, pos_sq, vel_sum, vel_sq, size_sum, size_sq, nees].
  std::vector<double> ba_pos, ba_pos2, ba_vel, ba_vel2, ba_sz, ba_sz2, ba_ne;
  std::vector<double> bo_pos, bo_pos2, bo_vel, bo_vel2, bo_ne;

  for (int i = 0; i < runs; ++i) {
    const RunRecord rec = run_scenario(cfg, cfg.seed + static_cast<uint64_t>(i));
    if (sink) sink(i, rec);
    if (rec.failed) {
      out.failures.push_back({i, rec.seed, rec.failure_step, rec.failure_reason});
      continue;
    }
    if (out.completed_runs == 0) {
      steps = rec.steps.size();
      out.t.resize(steps);
      for (size_t k = 0; k < steps; ++k) out.t[k] = rec.steps[k].t;
      auto zero = [&](std::vector<double>& v) { v.assign(steps, 0.0); };
      zero(ba_pos); zero(ba_pos2); zero(ba_vel); zero(ba_vel2);
      zero(ba_sz); zero(ba_sz2); zero(ba_ne);
      zero(bo_pos); zero(bo_pos2); zero(bo_vel); zero(bo_vel2); zero(bo_ne);
    } else if (rec.steps.size() != steps) {
      throw NumericError("inconsistent run lengths across repetitions");
    }
    for (size_t k = 0; k < steps; ++k) {
      const StepRecord& s = rec.steps[k];
      const double bap = (s.ba_state.head<3>() - s.target_position).norm();
      const double bav = (s.ba_state.segment<3>(3) - s.target_velocity).norm();
      const double bas = std::abs(s.ba_state(6) - s.target_size);
      const double bop = (s.bo_state.head<3>() - s.target_position).norm();
      const double bov = (s.bo_state.segment<3>(3) - s.target_velocity).norm();
      ba_pos[k] += bap; ba_pos2[k] += bap * bap;
      ba_vel[k] += bav; ba_vel2[k] += bav * bav;
      ba_sz[k] += bas; ba_sz2[k] += bas * bas;
      ba_ne[k] += s.ba_nees;
      bo_pos[k] += bop; bo_pos2[k] += bop * bop;
      bo_vel[k] += bov; bo_vel2[k] += bov * bov;
      bo_ne[k] += s.bo_nees;
    }
    ++out.completed_runs;
  }

  if (out.completed_runs > 0) {
    const double n = out.completed_runs;
    auto finish = [&](ModeAggregate& agg, const std::vector<double>& sum,
                      const std::vector<double>& sq, std::vector<double>& mean,
                      std::vector<double>& rmse) {
      (void)agg;
      mean.resize(steps);
      rmse.resize(steps);
      for (size_t k = 0; k < steps; ++k) {
        mean[k] = sum[k] / n;
        rmse[k] = std::sqrt(sq[k] / n);
      }
    };
    finish(out.bearing_angle, ba_pos, ba_pos2, out.bearing_angle.pos_err_mean,
           out.bearing_angle.pos_rmse);
    finish(out.bearing_angle, ba_vel, ba_vel2, out.bearing_angle.vel_err_mean,
           out.bearing_angle.vel_rmse);
    finish(out.bearing_angle, ba_sz, ba_sz2, out.bearing_angle.size_err_mean,
           out.bearing_angle.size_rmse);
    finish(out.bearing_only, bo_pos, bo_pos2, out.bearing_only.pos_err_mean,
           out.bearing_only.pos_rmse);
    finish(out.bearing_only, bo_vel, bo_vel2, out.bearing_only.vel_err_mean,
           out.bearing_only.vel_rmse);
    out.bearing_angle.avg_nees.resize(steps);
    out.bearing_only.avg_nees.resize(steps);
    for (size_t k = 0; k < steps; ++k) {
      out.bearing_angle.avg_nees[k] = ba_ne[k] / n;
      out.bearing_only.avg_nees[k] = bo_ne[k] / n;
    }

    const size_t window = std::min(
        steps, static_cast<size_t>(std::max(1.0, std::ceil(1.0 / cfg.dt))));
    auto finalize = [&](ModeAggregate& agg) {
      agg.final_step_pos_err = agg.pos_err_mean.back();
      double acc = 0.0;
      for (size_t k = steps - window; k < steps; ++k) acc += agg.pos_err_mean[k];
      agg.final_window_pos_err = acc / window;
      agg.diverged = agg.final_window_pos_err > cfg.divergence_threshold;
    };
    finalize(out.bearing_angle);
    finalize(out.bearing_only);
    out.bearing_angle.final_size_err = out.bearing_angle.size_err_mean.back();
  }
  return out;
}

}  // namespace bate
