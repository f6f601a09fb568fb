#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "bate/errors.hpp"
#include "bate/filter.hpp"
#include "bate/motion.hpp"
#include "bate/observability.hpp"
#include "bate/sim.hpp"

using namespace bate;

namespace {

std::mt19937_64 g_rng(1234);

Eigen::Vector3d random_vec(double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {scale * u(g_rng), scale * u(g_rng), scale * u(g_rng)};
}

// Constant-velocity target/observer pair with separated paths.
struct CvPair {
  PolynomialMotion target;
  PolynomialMotion observer;
  double size = 1.0;
};

CvPair random_cv_pair() {
  CvPair p;
  p.target = {1, {random_vec(10.0) + Eigen::Vector3d(0, 20, 0), random_vec(1.0)}};
  p.observer = {1, {random_vec(5.0), random_vec(1.0)}};
  p.size = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(g_rng);
  return p;
}

ObservationWindow cv_window(const CvPair& p, int samples, double dt) {
  return make_observation_window(AgentTrajectory{p.target}, AgentTrajectory{p.observer},
                                 samples, dt, p.size);
}

}  // namespace

TEST_CASE("validate_window enforces the window invariants") {
  ObservationWindow w;
  w.times = {0.0};
  w.bearings = {Eigen::Vector3d::UnitZ()};
  w.angles = {0.1};
  w.observer_positions = {Eigen::Vector3d::Zero()};
  CHECK_THROWS_AS(validate_window(w), InsufficientObservationsError);

  w.times = {0.0, 0.02, 0.05};  // non-uniform
  w.bearings = {Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ(),
                Eigen::Vector3d::UnitZ()};
  w.angles = {0.1, 0.1, 0.1};
  w.observer_positions = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                          Eigen::Vector3d::Zero()};
  CHECK_THROWS_AS(validate_window(w), ConfigError);

  w.times = {0.0, 0.02, 0.04};
  CHECK_NOTHROW(validate_window(w));

  w.bearings[1] = Eigen::Vector3d(1, 1, 0);  // not unit
  CHECK_THROWS_AS(validate_window(w), ConfigError);
}

TEST_CASE("single observation: H alone has rank 3") {
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d g = random_vec(1.0).normalized();
    const double theta = 0.01 + 0.3 * std::uniform_real_distribution<double>(0.0, 1.0)(g_rng);
    const ObservabilityReport r = analyze_rank(measurement_matrix(g, theta), 7);
    CHECK(r.rank == 3);
    CHECK(r.rank <= 4);
    CHECK_FALSE(r.observable);
    CHECK(r.null_basis.cols() == 4);
  }
}

TEST_CASE("constant-velocity pairs give rank 6 with the predicted null direction") {
  for (int trial = 0; trial < 25; ++trial) {
    const CvPair p = random_cv_pair();
    const ObservationWindow w = cv_window(p, 12, 0.02);
    const Eigen::MatrixXd q = build_observability_matrix(w);
    CHECK(q.rows() == 12 * 6);
    CHECK(q.cols() == 7);
    const ObservabilityReport r = analyze_rank(q, 7);
    REQUIRE(r.rank == 6);
    CHECK_FALSE(r.observable);
    REQUIRE(r.null_basis.cols() == 1);

    // Null direction aligns with [g(t1)/theta(t1); dv/l; 1].
    const Eigen::Vector3d dv = eval_polynomial_motion(p.target, 0.0).velocity -
                               eval_polynomial_motion(p.observer, 0.0).velocity;
    Eigen::VectorXd predicted(7);
    predicted << w.bearings[0] / w.angles[0], dv / p.size, 1.0;
    const double cos_sim = std::abs(r.null_basis.col(0).dot(predicted.normalized()));
    CHECK(cos_sim > 1.0 - 1e-8);
  }
}

TEST_CASE("unobservable mode value matches the expanded inner product") {
  const CvPair p{{1, {{0, 10, 0}, {0.5, -0.2, 0.1}}},
                 {1, {{1, 2, 0}, {-0.3, 0.4, 0.0}}},
                 1.3};
  const ObservationWindow w = cv_window(p, 10, 0.02);
  const ObservabilityReport r = analyze_rank(build_observability_matrix(w), 7);
  REQUIRE(r.null_basis.cols() == 1);
  // Scale the basis vector so its last component is 1.
  Eigen::VectorXd mode = r.null_basis.col(0) / r.null_basis.col(0)(6);

  const Eigen::Vector3d pt = eval_polynomial_motion(p.target, 0.0).position;
  const Eigen::Vector3d vt = eval_polynomial_motion(p.target, 0.0).velocity;
  const Eigen::Vector3d dv = vt - eval_polynomial_motion(p.observer, 0.0).velocity;
  Eigen::VectorXd x(7);
  x << pt, vt, p.size;
  const double expanded = pt.dot(w.bearings[0]) / w.angles[0] + vt.dot(dv) / p.size + p.size;
  CHECK(x.dot(mode) == doctest::Approx(expanded).epsilon(1e-9));
}

TEST_CASE("observer acceleration at any step i >= 3 lifts the rank to 7") {
  for (const int kink_step : {3, 5, 9}) {
    const CvPair p = random_cv_pair();
    std::vector<Eigen::Vector3d> tp, op;
    const double dt = 0.02;
    const int samples = 12;
    const Eigen::Vector3d accel = random_vec(3.0) + Eigen::Vector3d(0.5, 0.5, 0.5);
    for (int i = 0; i < samples; ++i) {
      const double t = i * dt;
      tp.push_back(eval_polynomial_motion(p.target, t).position);
      Eigen::Vector3d pos = eval_polynomial_motion(p.observer, t).position;
      // Quadratic kick beginning at the kink step (1-based step index).
      const double tk = t - (kink_step - 1) * dt;
      if (tk > 0.0) pos += 0.5 * accel * tk * tk;
      op.push_back(pos);
    }
    const ObservationWindow w = make_observation_window(tp, op, dt, p.size);
    const ObservabilityReport r = analyze_rank(build_observability_matrix(w), 7);
    CHECK(r.rank == 7);
    CHECK(r.observable);
    CHECK(r.null_basis.cols() == 0);
  }
}

TEST_CASE("along-bearing acceleration is observable under both analyses") {
  // Stationary target; observer accelerating strictly along the fixed bearing.
  const Eigen::Vector3d pt(0, 10, 0);
  const PolynomialMotion observer{1, {{0, 5, 0}, {0, 4, 0}, {0, -1, 0}}};
  std::vector<Eigen::Vector3d> tp, op;
  const double dt = 0.02;
  for (int i = 0; i < 10; ++i) {
    tp.push_back(pt);
    op.push_back(eval_polynomial_motion(observer, i * dt).position);
  }
  const ObservationWindow w = make_observation_window(tp, op, dt, 1.0);
  // Bearing truly fixed over the window.
  for (int i = 1; i < w.size(); ++i) {
    CHECK((w.bearings[i] - w.bearings[0]).norm() < 1e-12);
  }

  const ObservabilityReport r = analyze_rank(build_observability_matrix(w), 7);
  CHECK(r.rank == 7);
  CHECK(r.observable);

  const RecoveredSolution sol = recover_motion(stack_discrete_system(w, 0));
  CHECK(sol.size == doctest::Approx(1.0).epsilon(1e-8));
  CHECK((recovered_target_coefficients(sol)[0] - pt).norm() < 1e-8);
}

TEST_CASE("fit_polynomial reproduces exact polynomial samples") {
  const PolynomialMotion m{2, {{1, 0, 0}, {0, 2, 0}, {0, 0, -1}}};
  std::vector<double> times;
  std::vector<Eigen::Vector3d> values;
  for (int i = 0; i < 8; ++i) {
    times.push_back(0.1 * i);
    values.push_back(eval_polynomial_motion(m, times.back()).position);
  }
  const auto fit = fit_polynomial(times, values, 2);
  REQUIRE(fit.size() == 3);
  for (int j = 0; j < 3; ++j) CHECK((fit[j] - m.coefficients[j]).norm() < 1e-10);
}

TEST_CASE("stationary target from two observations") {
  const Eigen::Vector3d pt(2, 8, -1);
  const double size = 0.7;
  std::vector<Eigen::Vector3d> tp{pt, pt};
  std::vector<Eigen::Vector3d> op{{0, 0, 0}, {0.5, 0.1, 0}};
  const ObservationWindow w = make_observation_window(tp, op, 0.02, size);
  const RecoveredSolution sol = recover_motion(stack_discrete_system(w, 0));
  CHECK(sol.size == doctest::Approx(size).epsilon(1e-8));
  CHECK((sol.relative_coefficients[0] - (pt - sol.observer_fit[0])).norm() < 1e-8);
  CHECK((recovered_target_coefficients(sol)[0] - pt).norm() < 1e-8);
}

TEST_CASE("constant-velocity target from three observations under observer acceleration") {
  const PolynomialMotion target{1, {{0, 10, 0}, {0.7, 0.7, 0}}};
  // Accelerating observer: order-2 coefficients on an order-1 fit -> h != 0.
  const PolynomialMotion observer{1, {{0, 5, 0}, {0, 4, 0}, {0, -1, 0}}};
  CHECK(has_excess_order(observer, 1));
  const ObservationWindow w = make_observation_window(
      AgentTrajectory{target}, AgentTrajectory{observer}, 3, 0.1, 1.0);
  const StackedSystem sys = stack_discrete_system(w, 1);
  CHECK(sys.a.rows() == 9);
  CHECK(sys.a.cols() == 7);
  const RecoveredSolution sol = recover_motion(sys);
  CHECK(sol.residual_norm < 1e-9);
  CHECK(sol.size == doctest::Approx(1.0).epsilon(1e-8));
  const auto coeffs = recovered_target_coefficients(sol);
  // Shifted time origin equals t1 = 0 here, so coefficients match directly.
  CHECK((coeffs[0] - Eigen::Vector3d(0, 10, 0)).norm() < 1e-8);
  CHECK((coeffs[1] - Eigen::Vector3d(0.7, 0.7, 0)).norm() < 1e-8);
}

TEST_CASE("matched-order observer produces a detected rank deficiency") {
  const PolynomialMotion target{1, {{0, 10, 0}, {0.5, 0, 0}}};
  const PolynomialMotion observer{1, {{0, 5, 0}, {0, 1, 0}}};  // h == 0
  const ObservationWindow w = make_observation_window(
      AgentTrajectory{target}, AgentTrajectory{observer}, 8, 0.05, 1.0);
  const StackedSystem sys = stack_discrete_system(w, 1);
  const RankAnalysis ra = svd_rank(sys.a);
  CHECK(ra.singular_values.minCoeff() < 1e-10);
  CHECK_THROWS_AS(recover_motion(sys), UnobservableError);
  try {
    recover_motion(sys);
  } catch (const UnobservableError& err) {
    CHECK(err.null_direction.size() == 7);
    CHECK((sys.a * err.null_direction).norm() < 1e-8);
  }
}

TEST_CASE("window shorter than n+2 is rejected with the bound in the message") {
  const PolynomialMotion target{1, {{0, 10, 0}, {0.5, 0, 0}}};
  const PolynomialMotion observer{1, {{0, 5, 0}, {0, 4, 0}, {0, -1, 0}}};
  const ObservationWindow w = make_observation_window(
      AgentTrajectory{target}, AgentTrajectory{observer}, 2, 0.05, 1.0);
  CHECK_THROWS_AS(stack_discrete_system(w, 1), InsufficientObservationsError);
  try {
    stack_discrete_system(w, 1);
  } catch (const InsufficientObservationsError& err) {
    CHECK(err.required_samples == 3);
    CHECK(err.got_samples == 2);
  }
}

TEST_CASE("theorem sharpness: N = n+2 recovers, N = n+1 is insufficient") {
  for (int n = 0; n <= 2; ++n) {
    // Observer with nonzero terms above order n.
    std::vector<Eigen::Vector3d> oc;
    for (int j = 0; j <= n + 1; ++j) oc.push_back(random_vec(2.0) + Eigen::Vector3d(0, 1, 0));
    const PolynomialMotion observer{n, oc};
    std::vector<Eigen::Vector3d> tc;
    for (int j = 0; j <= n; ++j) tc.push_back(random_vec(1.0) + Eigen::Vector3d(0, 15, 0));
    const PolynomialMotion target{n, tc};

    const ObservationWindow enough = make_observation_window(
        AgentTrajectory{target}, AgentTrajectory{observer}, n + 2, 0.5, 1.0);
    const RecoveredSolution sol = recover_motion(stack_discrete_system(enough, n));
    CHECK(sol.size == doctest::Approx(1.0).epsilon(1e-6));
    const auto coeffs = recovered_target_coefficients(sol);
    // t1 = 0 here, so the shifted coefficients compare directly.
    for (int j = 0; j <= n; ++j) {
      CHECK((coeffs[j] - target.coefficients[j]).norm() < 1e-6);
    }

    if (n == 0) {
      // A single sample is below the window minimum itself.
      CHECK_THROWS_AS(make_observation_window(AgentTrajectory{target},
                                              AgentTrajectory{observer}, 1, 0.5, 1.0),
                      InsufficientObservationsError);
    } else {
      const ObservationWindow short_w = make_observation_window(
          AgentTrajectory{target}, AgentTrajectory{observer}, n + 1, 0.5, 1.0);
      CHECK_THROWS_AS(stack_discrete_system(short_w, n), InsufficientObservationsError);
    }
  }
}

TEST_CASE("recovered sample positions satisfy the bearing identity") {
  const PolynomialMotion target{1, {{1, 12, 0}, {0.3, -0.1, 0.2}}};
  const PolynomialMotion observer{1, {{0, 2, 0}, {0.5, 0.5, 0}, {0, 0.7, 0}}};
  const ObservationWindow w = make_observation_window(
      AgentTrajectory{target}, AgentTrajectory{observer}, 9, 0.05, 0.8);
  const RecoveredSolution sol = recover_motion(stack_discrete_system(w, 1));
  const auto positions = recovered_target_positions(sol, w);
  REQUIRE(static_cast<int>(positions.size()) == w.size());
  for (int i = 0; i < w.size(); ++i) {
    const Eigen::Vector3d expect =
        w.observer_positions[i] + w.bearings[i] * (sol.size / w.angles[i]);
    CHECK((positions[i] - expect).norm() < 1e-12);
    // And they coincide with the true target path.
    CHECK((positions[i] - eval_polynomial_motion(target, w.times[i]).position).norm() <
          1e-7);
  }
}

TEST_CASE("least-squares recovery matches a dense normal-equations oracle") {
  for (int trial = 0; trial < 10; ++trial) {
    const PolynomialMotion target{1, {random_vec(5.0) + Eigen::Vector3d(0, 20, 0),
                                      random_vec(0.5)}};
    const PolynomialMotion observer{
        1, {random_vec(2.0), random_vec(0.5), random_vec(0.3), random_vec(0.2)}};
    const ObservationWindow w = make_observation_window(
        AgentTrajectory{target}, AgentTrajectory{observer}, 10, 0.05, 1.0);
    const StackedSystem sys = stack_discrete_system(w, 1);
    const RecoveredSolution sol = recover_motion(sys);

    const Eigen::VectorXd oracle =
        (sys.a.transpose() * sys.a).ldlt().solve(sys.a.transpose() * sys.h);
    Eigen::VectorXd got(7);
    got << sol.relative_coefficients[0], sol.relative_coefficients[1], sol.size;
    // The normal equations square the conditioning, so agreement is only
    // expected to roughly half the working precision.
    CHECK((got - oracle).norm() < 1e-6 * (1.0 + oracle.norm()));
  }
}

TEST_CASE("rank analysis and recovery agree about observability") {
  for (int trial = 0; trial < 20; ++trial) {
    const bool excess = trial % 2 == 0;
    const PolynomialMotion target{1, {random_vec(5.0) + Eigen::Vector3d(0, 25, 0),
                                      random_vec(0.5)}};
    std::vector<Eigen::Vector3d> oc{random_vec(2.0), random_vec(0.5)};
    if (excess) oc.push_back(random_vec(0.5) + Eigen::Vector3d(0.2, 0.2, 0));
    const PolynomialMotion observer{1, oc};

    const ObservationWindow w = make_observation_window(
        AgentTrajectory{target}, AgentTrajectory{observer}, 10, 0.05, 1.0);
    const ObservabilityReport r = analyze_rank(build_observability_matrix(w), 7);
    const StackedSystem sys = stack_discrete_system(w, 1);
    if (excess) {
      CHECK(r.observable);
      CHECK_NOTHROW(recover_motion(sys));
    } else {
      CHECK_FALSE(r.observable);
      CHECK_THROWS_AS(recover_motion(sys), UnobservableError);
    }
  }
}
