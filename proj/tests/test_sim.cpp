#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "bate/config.hpp"
#include "bate/errors.hpp"
#include "bate/sim.hpp"

using namespace bate;

TEST_CASE("effective_size: constant profile ignores bearing and time") {
  SizeProfile p;
  p.base_size = 1.4;
  CHECK(effective_size(p, Eigen::Vector3d::UnitX(), 0.0) == 1.4);
  CHECK(effective_size(p, Eigen::Vector3d::UnitY(), 99.0) == 1.4);
}

TEST_CASE("effective_size: spinning square silhouette") {
  SizeProfile p;
  p.kind = SizeProfile::Kind::spinning_square;
  p.base_size = 2.0;
  p.spin_rate = 1.0;
  const Eigen::Vector3d g = Eigen::Vector3d::UnitX();  // azimuth 0
  // Face-on at t = 0: the side length.
  CHECK(effective_size(p, g, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  // Quarter of a quarter turn: the diagonal.
  CHECK(effective_size(p, g, M_PI / 4.0) ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  // Periodic with period pi/2.
  CHECK(effective_size(p, g, 0.3) ==
        doctest::Approx(effective_size(p, g, 0.3 + M_PI / 2.0)).epsilon(1e-12));
}

TEST_CASE("png_command: zero line-of-sight rate keeps the direction") {
  KinematicSample obs;
  obs.position = {0, 0, 0};
  obs.velocity = {0, 3, 0};
  KinematicSample tgt;
  tgt.position = {0, 10, 0};
  tgt.velocity = {0, 0, 0};
  // Dead ahead, stationary: no LOS rotation.
  const Eigen::Vector3d cmd = png_command(obs, tgt, 1.0, 3.0, 0.02);
  CHECK((cmd - Eigen::Vector3d(0, 3, 0)).norm() < 1e-12);

  // Head-on constant-bearing collision course: also straight.
  tgt.velocity = {0, -1, 0};
  const Eigen::Vector3d cmd2 = png_command(obs, tgt, 1.0, 3.0, 0.02);
  CHECK((cmd2 - Eigen::Vector3d(0, 3, 0)).norm() < 1e-12);
}

TEST_CASE("png_command turns toward a crossing target and errors on zero range") {
  KinematicSample obs;
  obs.position = {0, 0, 0};
  obs.velocity = {0, 3, 0};
  KinematicSample tgt;
  tgt.position = {0, 10, 0};
  tgt.velocity = {1, 0, 0};  // crossing right
  const Eigen::Vector3d cmd = png_command(obs, tgt, 1.0, 3.0, 0.02);
  CHECK(cmd.norm() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(cmd.x() > 0.0);  // lead turn into the target's motion

  tgt.position = obs.position;
  CHECK_THROWS_AS(png_command(obs, tgt, 1.0, 3.0, 0.02), NumericError);
}

TEST_CASE("range_tracking_command closed-form cases") {
  GuidanceLaw law;
  law.kind = GuidanceLaw::Kind::range_tracking;
  law.track_gain = 3.0;
  law.desired_range = 3.0;
  law.speed_limit = 3.0;
  KinematicSample tgt;
  tgt.velocity = {0.3, -0.2, 0.1};
  const Eigen::Vector3d g = Eigen::Vector3d::UnitY();

  // At the desired range the command is exactly the target velocity.
  tgt.position = {0, 3, 0};
  CHECK((range_tracking_command({0, 0, 0}, tgt, law, g) - tgt.velocity).norm() == 0.0);

  // r = 2 r_d: shape factor (36-9)/36 with k = 3 gives 2.25 along the bearing.
  tgt.position = {0, 6, 0};
  tgt.velocity = {0, 0, 0};
  CHECK((range_tracking_command({0, 0, 0}, tgt, law, g) - Eigen::Vector3d(0, 2.25, 0))
            .norm() < 1e-15);

  // Far away the unclamped command v_T + k g exceeds the limit and is clamped.
  tgt.position = {0, 1000, 0};
  tgt.velocity = {3, 0, 0};
  const Eigen::Vector3d cmd = range_tracking_command({0, 0, 0}, tgt, law, g);
  CHECK(cmd.norm() == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(range_tracking_command(tgt.position, tgt, law, g), NumericError);
}

TEST_CASE("eval_trajectory: circle script position and derivatives") {
  CircleScript c;
  c.center = {0, 10, 0};
  c.radius = 5.0;
  c.angular_rate = 0.6;
  c.phase = -M_PI / 2.0;
  const KinematicSample s0 = eval_trajectory(AgentTrajectory{c}, 0.0);
  CHECK((s0.position - Eigen::Vector3d(0, 5, 0)).norm() < 1e-12);
  CHECK(s0.velocity.norm() == doctest::Approx(3.0).epsilon(1e-12));  // r*omega
  // Velocity tangent: orthogonal to the radius vector.
  CHECK(std::abs(s0.velocity.dot(s0.position - c.center)) < 1e-12);
  const KinematicSample s1 = eval_trajectory(AgentTrajectory{c}, 1.7);
  CHECK((s1.position - c.center).norm() == doctest::Approx(5.0).epsilon(1e-12));

  const GuidedMotion g{{}, {0, 0, 0}, {0, 1, 0}};
  CHECK_THROWS_AS(eval_trajectory(AgentTrajectory{g}, 0.0), ConfigError);
}

TEST_CASE("synthesize_measurement: zero noise returns the exact pair") {
  NoiseModel noise;
  noise.sigma_mu = 0.0;
  noise.sigma_w = 0.0;
  NoiseSampler sampler(42);
  const Eigen::Vector3d pt(0, 10, 0), po(0, 0, 0);
  const Measurement m =
      synthesize_measurement(pt, 1.0, po, noise, AngleModel::exact, sampler);
  CHECK((m.bearing - Eigen::Vector3d(0, 1, 0)).norm() < 1e-15);
  CHECK(m.angle == doctest::Approx(2.0 * std::atan(0.05)).epsilon(1e-15));

  NoiseSampler sampler2(42);
  const Measurement mp =
      synthesize_measurement(pt, 1.0, po, noise, AngleModel::proportional, sampler2);
  CHECK(mp.angle == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("synthesize_measurement noise statistics match the sampling model") {
  NoiseModel noise;  // sigma_mu = sigma_w = 0.01
  NoiseSampler sampler(7);
  const Eigen::Vector3d pt(0, 0, 10), po(0, 0, 0);  // bearing +z
  const int draws = 100000;
  double sx = 0, sxx = 0, sy = 0, syy = 0, sn2 = 0, sw = 0, sww = 0;
  for (int i = 0; i < draws; ++i) {
    const Measurement m =
        synthesize_measurement(pt, 1.0, po, noise, AngleModel::exact, sampler);
    const Eigen::Vector3d d = m.bearing - Eigen::Vector3d(0, 0, 1);
    sx += d.x();
    sxx += d.x() * d.x();
    sy += d.y();
    syy += d.y() * d.y();
    sn2 += d.squaredNorm();
    const double w = m.angle - 2.0 * std::atan(0.05);
    sw += w;
    sww += w * w;
  }
  const double std_x = std::sqrt(sxx / draws - (sx / draws) * (sx / draws));
  const double std_y = std::sqrt(syy / draws - (sy / draws) * (sy / draws));
  const double rms_norm = std::sqrt(sn2 / draws);
  const double std_w = std::sqrt(sww / draws - (sw / draws) * (sw / draws));
  // Per transverse axis: sigma_mu * sqrt(1/3). Norm RMS: sigma_mu * sqrt(2/3).
  CHECK(std_x == doctest::Approx(0.01 * 0.5773502691896257).epsilon(0.02));
  CHECK(std_y == doctest::Approx(0.01 * 0.5773502691896257).epsilon(0.02));
  CHECK(rms_norm == doctest::Approx(0.01 * 0.816496580927726).epsilon(0.02));
  CHECK(std_w == doctest::Approx(0.01).epsilon(0.02));
}

TEST_CASE("noise streams are reproducible and independent of sigma values") {
  NoiseSampler a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.gauss() == b.gauss());
  // Zero sigmas consume the same number of draws as nonzero ones.
  NoiseModel loud;  // 0.01 / 0.01
  NoiseModel silent;
  silent.sigma_mu = 0.0;
  silent.sigma_w = 0.0;
  NoiseSampler s1(5), s2(5);
  (void)synthesize_measurement({0, 10, 0}, 1.0, {0, 0, 0}, loud, AngleModel::exact, s1);
  (void)synthesize_measurement({0, 10, 0}, 1.0, {0, 0, 0}, silent, AngleModel::exact, s2);
  CHECK(s1.gauss() == s2.gauss());
}

TEST_CASE("nees closed-form cases and pseudoinverse fallback") {
  Eigen::VectorXd x(7), e(7);
  x.setZero();
  CHECK(nees(x, x, Eigen::MatrixXd::Identity(7, 7)) == 0.0);
  e.setZero();
  e(0) = 1.0;
  e(3) = 2.0;
  CHECK(nees(x + e, x, Eigen::MatrixXd::Identity(7, 7)) == doctest::Approx(5.0));
  e.setZero();
  e(0) = 2.0;
  CHECK(nees(x + e, x, 4.0 * Eigen::MatrixXd::Identity(7, 7)) == doctest::Approx(1.0));

  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(7, 7);
  singular(0, 0) = 1.0;
  bool used_pinv = false;
  const double v = nees(x + e, x, singular, &used_pinv);
  CHECK(used_pinv);
  CHECK(v == doctest::Approx(4.0));
}

TEST_CASE("validate_scenario rejects ill-formed configurations") {
  ScenarioConfig cfg = preset_config("s1-circle");
  CHECK_NOTHROW(validate_scenario(cfg));

  ScenarioConfig bad = cfg;
  bad.duration = 0.0;
  CHECK_THROWS_AS(validate_scenario(bad), ConfigError);

  bad = cfg;
  bad.target = GuidedMotion{};
  CHECK_THROWS_AS(validate_scenario(bad), ConfigError);

  bad = cfg;
  GuidedMotion gm;
  gm.law.kind = GuidanceLaw::Kind::png;
  gm.initial_velocity = Eigen::Vector3d::Zero();
  bad.observer = gm;
  CHECK_THROWS_AS(validate_scenario(bad), ConfigError);

  bad = cfg;
  bad.noise.sigma_mu = -0.1;
  CHECK_THROWS_AS(validate_scenario(bad), ConfigError);
}

TEST_CASE("run_scenario is bit-deterministic for a fixed seed") {
  ScenarioConfig cfg = preset_config("s1-circle");
  cfg.duration = 1.0;
  const RunRecord a = run_scenario(cfg, 123);
  const RunRecord b = run_scenario(cfg, 123);
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].meas.bearing == b.steps[k].meas.bearing);
    CHECK(a.steps[k].meas.angle == b.steps[k].meas.angle);
    CHECK(a.steps[k].ba_state == b.steps[k].ba_state);
    CHECK(a.steps[k].bo_state == b.steps[k].bo_state);
    CHECK(a.steps[k].ba_nees == b.steps[k].ba_nees);
  }
  const RunRecord c = run_scenario(cfg, 124);
  CHECK(a.steps[5].meas.angle != c.steps[5].meas.angle);
}

TEST_CASE("scenario 1 geometry: the subtended angle is constant on the circle") {
  ScenarioConfig cfg = preset_config("s1-circle");
  cfg.noise.sigma_mu = 0.0;
  cfg.noise.sigma_w = 0.0;
  cfg.duration = 2.0;
  const RunRecord rec = run_scenario(cfg);
  const double theta0 = rec.steps.front().meas.angle;
  for (const StepRecord& s : rec.steps) {
    CHECK(std::abs(s.meas.angle - theta0) < 1e-12);
  }
}

TEST_CASE("scenario 2 geometry: the bearing is constant on the line") {
  ScenarioConfig cfg = preset_config("s2-line");
  cfg.noise.sigma_mu = 0.0;
  cfg.noise.sigma_w = 0.0;
  cfg.duration = 2.0;
  const RunRecord rec = run_scenario(cfg);
  const Eigen::Vector3d g0 = rec.steps.front().meas.bearing;
  for (const StepRecord& s : rec.steps) {
    CHECK((s.meas.bearing - g0).norm() < 1e-12);
  }
}

TEST_CASE("truth propagation matches the closed form at every step") {
  ScenarioConfig cfg = preset_config("s2-line");
  cfg.duration = 3.0;
  const RunRecord rec = run_scenario(cfg);
  for (const StepRecord& s : rec.steps) {
    const KinematicSample kt = eval_trajectory(cfg.target, s.t);
    const KinematicSample ko = eval_trajectory(cfg.observer, s.t);
    CHECK((s.target_position - kt.position).norm() < 1e-12);
    CHECK((s.observer_position - ko.position).norm() < 1e-12);
  }
}

TEST_CASE("zero-noise proportional run with exact initialization stays on truth") {
  ScenarioConfig cfg = preset_config("s1-circle");
  cfg.noise.sigma_mu = 0.0;
  cfg.noise.sigma_w = 0.0;
  cfg.angle_model = AngleModel::proportional;
  cfg.filter.initial_position = {0, 10, 0};  // exact truth
  cfg.filter.initial_velocity = {0, 0, 0};
  cfg.filter.initial_size = 1.0;
  cfg.duration = 4.0;
  const RunRecord rec = run_scenario(cfg);
  for (const StepRecord& s : rec.steps) {
    CHECK((s.ba_state.head<3>() - s.target_position).norm() < 1e-6);
    CHECK(std::abs(s.ba_state(6) - s.target_size) < 1e-6);
    // Zero noise makes the innovation covariance exactly singular; the
    // pseudoinverse gain amplifies rounding near the cutoff, so the
    // bearing-only track holds truth a little less tightly.
    CHECK((s.bo_state.head<3>() - s.target_position).norm() < 1e-4);
  }
}

TEST_CASE("png pursuit closes the range and stops on the configured floor") {
  ScenarioConfig cfg = preset_config("s3-png");
  const RunRecord rec = run_scenario(cfg);
  CHECK(rec.stopped_on_range);
  REQUIRE(rec.steps.size() > 10);
  double prev = (rec.steps.front().target_position - rec.steps.front().observer_position).norm();
  for (size_t k = 1; k < rec.steps.size(); ++k) {
    const double r =
        (rec.steps[k].target_position - rec.steps[k].observer_position).norm();
    CHECK(r < prev);  // strictly decreasing range
    prev = r;
  }
  CHECK(prev < 1.0);  // ends close to the stop threshold
}

TEST_CASE("range-tracking pursuit settles at the desired range within eight seconds") {
  ScenarioConfig cfg = preset_config("track-follow");
  const RunRecord rec = run_scenario(cfg);
  for (const StepRecord& s : rec.steps) {
    if (s.t <= 8.0) continue;
    const double r = (s.target_position - s.observer_position).norm();
    CHECK(std::abs(r - 3.0) < 0.1);
  }
}

TEST_CASE("failed runs are truncated, recorded, and excluded from aggregates") {
  ScenarioConfig cfg;
  cfg.name = "collision";
  cfg.duration = 2.0;
  cfg.dt = 0.02;
  cfg.seed = 1;
  cfg.target = PolynomialMotion{0, {Eigen::Vector3d::Zero()}};
  // Observer drives exactly through the target at t = 1.
  cfg.observer = PolynomialMotion{1, {{-1, 0, 0}, {1, 0, 0}}};
  cfg.filter.initial_position = {0.5, 0.5, 0};
  cfg.filter.initial_size = 1.0;
  const RunRecord rec = run_scenario(cfg);
  CHECK(rec.failed);
  CHECK(rec.failure_step == 50);
  CHECK(rec.steps.size() == 50);  // steps before the singular geometry
  CHECK(rec.failure_reason.find("range") != std::string::npos);

  const MonteCarloSummary mc = monte_carlo(cfg, 3);
  CHECK(mc.requested_runs == 3);
  CHECK(mc.completed_runs == 0);
  CHECK(mc.failures.size() == 3);
  CHECK(mc.failures[1].seed == cfg.seed + 1);
}

TEST_CASE("monte_carlo with one run reproduces that run's metrics") {
  ScenarioConfig cfg = preset_config("s1-circle");
  cfg.duration = 1.0;
  const RunRecord rec = run_scenario(cfg, cfg.seed);
  const MonteCarloSummary mc = monte_carlo(cfg, 1);
  REQUIRE(mc.t.size() == rec.steps.size());
  CHECK(mc.completed_runs == 1);
  for (size_t k = 0; k < mc.t.size(); ++k) {
    const double pos_err =
        (rec.steps[k].ba_state.head<3>() - rec.steps[k].target_position).norm();
    CHECK(mc.bearing_angle.pos_err_mean[k] == doctest::Approx(pos_err).epsilon(1e-12));
    CHECK(mc.bearing_angle.pos_rmse[k] == doctest::Approx(pos_err).epsilon(1e-12));
    CHECK(mc.bearing_angle.avg_nees[k] ==
          doctest::Approx(rec.steps[k].ba_nees).epsilon(1e-12));
  }
}

TEST_CASE("monte_carlo aggregates mean and rmse correctly across runs") {
  ScenarioConfig cfg = preset_config("s1-circle");
  cfg.duration = 0.5;
  const int runs = 4;
  std::vector<RunRecord> recs;
  for (int i = 0; i < runs; ++i) recs.push_back(run_scenario(cfg, cfg.seed + i));
  const MonteCarloSummary mc = monte_carlo(cfg, runs);
  const size_t last = mc.t.size() - 1;
  double sum = 0.0, sq = 0.0;
  for (const RunRecord& r : recs) {
    const double e =
        (r.steps[last].bo_state.head<3>() - r.steps[last].target_position).norm();
    sum += e;
    sq += e * e;
  }
  CHECK(mc.bearing_only.pos_err_mean[last] == doctest::Approx(sum / runs).epsilon(1e-12));
  CHECK(mc.bearing_only.pos_rmse[last] ==
        doctest::Approx(std::sqrt(sq / runs)).epsilon(1e-12));
}
