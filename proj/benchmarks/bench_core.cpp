#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "bate/config.hpp"
#include "bate/filter.hpp"
#include "bate/linalg.hpp"
#include "bate/observability.hpp"
#include "bate/sim.hpp"

namespace {

using namespace bate;

// One circling-observer measurement at a fixed geometry.
Measurement fixed_measurement() {
  Measurement m;
  m.bearing = Eigen::Vector3d(0.1, 0.9, 0.2).normalized();
  m.angle = 0.12;
  return m;
}

void BM_FilterStep(benchmark::State& state) {
  const FilterMode mode =
      state.range(0) == 0 ? FilterMode::bearing_angle : FilterMode::bearing_only;
  FilterConfig cfg;
  cfg.mode = mode;
  TargetState init;
  init.position = {0, 12, 0};
  init.size = 1.2;
  FilterState fs = make_filter_state(init, 1.0, mode);
  const Measurement meas = fixed_measurement();
  const Eigen::Vector3d observer(0, 2, 0);
  for (auto _ : state) {
    fs = step(fs, meas, observer, cfg);
    benchmark::DoNotOptimize(fs.x.data());
  }
}
BENCHMARK(BM_FilterStep)->Arg(0)->Arg(1)->ArgNames({"mode"});

void BM_PseudoInverse(benchmark::State& state) {
  // Rank-deficient innovation-covariance shape, the hot path inside update().
  const Measurement meas = fixed_measurement();
  const Eigen::MatrixXd h = measurement_matrix(meas.bearing, meas.angle);
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(7, 7);
  const Eigen::MatrixXd s = h * p * h.transpose();
  for (auto _ : state) {
    benchmark::DoNotOptimize(pseudo_inverse(s).data());
  }
}
BENCHMARK(BM_PseudoInverse);

void BM_ObservabilityMatrix(benchmark::State& state) {
  const PolynomialMotion target{1, {{0, 20, 0}, {0.5, 0.3, 0}}};
  const PolynomialMotion observer{1, {{0, 0, 0}, {1, 0, 0}}};
  const ObservationWindow w = make_observation_window(
      AgentTrajectory{target}, AgentTrajectory{observer},
      static_cast<int>(state.range(0)), 0.02, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_observability_matrix(w).data());
  }
}
BENCHMARK(BM_ObservabilityMatrix)->Arg(12)->Arg(100)->ArgNames({"samples"});

void BM_RankAnalysis(benchmark::State& state) {
  const PolynomialMotion target{1, {{0, 20, 0}, {0.5, 0.3, 0}}};
  const PolynomialMotion observer{1, {{0, 0, 0}, {1, 0, 0}}};
  const ObservationWindow w = make_observation_window(
      AgentTrajectory{target}, AgentTrajectory{observer},
      static_cast<int>(state.range(0)), 0.02, 1.0);
  const Eigen::MatrixXd q = build_observability_matrix(w);
  for (auto _ : state) {
    benchmark::DoNotOptimize(analyze_rank(q, 7).rank);
  }
}
BENCHMARK(BM_RankAnalysis)->Arg(12)->Arg(100)->ArgNames({"samples"});

void BM_ScenarioRun(benchmark::State& state) {
  ScenarioConfig cfg = preset_config("s1-circle");
  cfg.duration = 2.0;
  for (auto _ : state) {
    const RunRecord rec = run_scenario(cfg);
    benchmark::DoNotOptimize(rec.steps.size());
  }
}
BENCHMARK(BM_ScenarioRun);

}  // namespace

BENCHMARK_MAIN();
