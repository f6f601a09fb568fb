#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bate/filter.hpp"
#include "bate/geometry.hpp"
#include "bate/motion.hpp"
#include "bate/observability.hpp"

namespace bate {

/// Physical noise levels for synthesized measurements.
struct NoiseModel {
  double sigma_mu = 0.01;  // bearing perturbation angle std, radians
  double sigma_w = 0.01;   // subtended-angle additive noise std, radians
};

/// exact: theta = 2*atan(l/2r). proportional: theta = l/r, the model the
/// pseudo-linear identities and the observability analyses are exact under.
enum class AngleModel { exact, proportional };

/// Deterministic per-run noise stream. Draw order per step is fixed:
/// bearing axis (3 normals), bearing angle, angle noise.
class NoiseSampler {
 public:
  explicit NoiseSampler(uint64_t seed) : engine_(seed) {}
  double gauss() { return normal_(engine_); }
  Eigen::Vector3d unit_axis();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

struct SizeProfile {
  enum class Kind { constant, spinning_square };
  Kind kind = Kind::constant;
  double base_size = 1.0;
  double spin_rate = 0.0;  // rad/s, spinning_square only
};

/// Silhouette width presented orthogonal to the bearing. For a spinning
/// square of side base_size at relative angle phi the width is
/// base_size * (|cos phi| + |sin phi|): side-on gives the side, the diagonal
/// gives side * sqrt(2).
double effective_size(const SizeProfile& profile, const Eigen::Vector3d& bearing, double t);

struct GuidanceLaw {
  enum class Kind { png, range_tracking };
  Kind kind = Kind::png;
  double navigation_gain = 1.0;  // png
  double speed = 3.0;            // png, constant observer speed
  double track_gain = 3.0;       // range_tracking
  double desired_range = 3.0;    // range_tracking
  double speed_limit = 3.0;      // range_tracking command clamp
};

/// True proportional navigation: the constant-speed velocity direction is
/// rotated about the line-of-sight rate axis by
/// gain * los_rate * closing_speed / speed * dt.
Eigen::Vector3d png_command(const KinematicSample& observer, const KinematicSample& target,
                            double gain, double speed, double dt);

/// v_cmd = v_T + k * (r^2 - r_d^2) / r^2 * g, clamped to the speed limit.
Eigen::Vector3d range_tracking_command(const Eigen::Vector3d& observer_position,
                                       const KinematicSample& target,
                                       const GuidanceLaw& law,
                                       const Eigen::Vector3d& bearing);

struct CircleScript {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
  double angular_rate = 1.0;
  double phase = 0.0;
};

struct GuidedMotion {
  GuidanceLaw law;
  Eigen::Vector3d initial_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d initial_velocity = Eigen::Vector3d::Zero();
};

/// Exactly one motion kind: closed-form polynomial, scripted circle, or a
/// guidance law integrated during the run.
using AgentTrajectory = std::variant<PolynomialMotion, CircleScript, GuidedMotion>;

/// Analytic kinds only; guided trajectories exist only inside run_scenario.
KinematicSample eval_trajectory(const AgentTrajectory& traj, double t);

/// Noise-free bearing/angle pair from truth, then the bearing is perturbed by
/// a random rotation R(axis, eps), eps ~ N(0, sigma_mu), and the angle gets
/// additive N(0, sigma_w), clamped to (0, pi/2).
Measurement synthesize_measurement(const Eigen::Vector3d& target_position,
                                   double effective_size,
                                   const Eigen::Vector3d& observer_position,
                                   const NoiseModel& noise, AngleModel angle_model,
                                   NoiseSampler& sampler);

/// Noise-free window with the proportional angle convention (the one the
/// rank/null-space results are exact under).
ObservationWindow make_observation_window(const AgentTrajectory& target,
                                          const AgentTrajectory& observer, int samples,
                                          double dt, double target_size, double t0 = 0.0);

ObservationWindow make_observation_window(const std::vector<Eigen::Vector3d>& target_positions,
                                          const std::vector<Eigen::Vector3d>& observer_positions,
                                          double dt, double target_size, double t0 = 0.0);

struct FilterSettings {
  double sigma_v = 1e-3;
  double sigma_ell = 1e-4;
  double min_size = 0.01;
  double min_range = 0.1;
  Eigen::Vector3d initial_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d initial_velocity = Eigen::Vector3d::Zero();
  double initial_size = 1.0;
  double initial_covariance = 0.1;
};

struct ScenarioConfig {
  std::string name = "custom";
  double duration = 10.0;
  double dt = 0.02;
  int runs = 100;
  uint64_t seed = 1;
  AgentTrajectory target = PolynomialMotion{0, {Eigen::Vector3d::Zero()}};
  AgentTrajectory observer = PolynomialMotion{0, {Eigen::Vector3d::Zero()}};
  SizeProfile size_profile;
  NoiseModel noise;
  FilterSettings filter;
  AngleModel angle_model = AngleModel::exact;
  double stop_range = 0.0;  // > 0: stop once the true range drops below
  double divergence_threshold = 1.0;
};

void validate_scenario(const ScenarioConfig& cfg);

/// Filter configuration implied by a scenario (noise assumptions follow the
/// scenario's noise block).
FilterConfig make_filter_config(const ScenarioConfig& cfg, FilterMode mode);

struct StepRecord {
  double t = 0.0;
  Eigen::Vector3d target_position, target_velocity;
  double target_size = 0.0;  // effective size at t
  Eigen::Vector3d observer_position, observer_velocity;
  Measurement meas;
  Eigen::VectorXd ba_state, bo_state;
  Eigen::VectorXd ba_cov_diag, bo_cov_diag;
  double ba_cov_trace = 0.0, bo_cov_trace = 0.0;
  double ba_nees = 0.0, bo_nees = 0.0;
};

struct RunRecord {
  std::vector<StepRecord> steps;
  uint64_t seed = 0;
  bool failed = false;
  int failure_step = -1;
  std::string failure_reason;
  bool stopped_on_range = false;
};

/// Normalized estimation error squared, (x - x_hat)^T P^-1 (x - x_hat).
/// Falls back to a pseudoinverse on singular covariance and reports it
/// through used_pseudoinverse when provided.
double nees(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate,
            const Eigen::MatrixXd& covariance, bool* used_pseudoinverse = nullptr);

RunRecord run_scenario(const ScenarioConfig& cfg, uint64_t seed);
inline RunRecord run_scenario(const ScenarioConfig& cfg) { return run_scenario(cfg, cfg.seed); }

struct ModeAggregate {
  std::vector<double> pos_err_mean, pos_rmse;
  std::vector<double> vel_err_mean, vel_rmse;
  std::vector<double> size_err_mean, size_rmse;  // bearing_angle only
  std::vector<double> avg_nees;
  double final_step_pos_err = 0.0;
  double final_window_pos_err = 0.0;  // mean over the trailing second
  double final_size_err = 0.0;
  bool diverged = false;
};

struct FailureInfo {
  int run = -1;
  uint64_t seed = 0;
  int step = -1;
  std::string reason;
};

struct MonteCarloSummary {
  std::vector<double> t;
  ModeAggregate bearing_angle;
  ModeAggregate bearing_only;
  int requested_runs = 0;
  int completed_runs = 0;
  std::vector<FailureInfo> failures;
};

/// Runs `runs` independent repetitions seeded base_seed + i, aggregates
/// per-step statistics over completed runs, and reports failures. The sink,
/// when set, receives every run record as it finishes.
MonteCarloSummary monte_carlo(const ScenarioConfig& cfg, int runs,
                              const std::function<void(int, const RunRecord&)>& sink = {});

}  // namespace bate
