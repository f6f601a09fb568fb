#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "bate/config.hpp"
#include "bate/errors.hpp"
#include "bate/filter.hpp"
#include "bate/io.hpp"
#include "bate/observability.hpp"
#include "bate/sim.hpp"
#include "bate/version.hpp"

namespace bate::cli {

namespace {

using nlohmann::json;

ScenarioConfig resolve_config(const std::string& preset, const std::string& config_path) {
  if (!preset.empty() && !config_path.empty()) {
    throw ConfigError("--preset and --config are mutually exclusive");
  }
  if (!preset.empty()) return preset_config(preset);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open '" + config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_config(buf.str());
  }
  throw ConfigError("one of --preset or --config is required");
}

std::string fnv1a64_hex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json vec3_list_json(const std::vector<Eigen::Vector3d>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(vec3_json(v));
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json provenance_json(const Provenance& prov) {
  return {{"tool_version", prov.tool_version},
          {"config_hash", prov.config_hash},
          {"seed", prov.seed},
          {"generated_at", prov.generated_at}};
}

}  // namespace

int cmd_simulate(const SimulateOptions& opts) {
  ScenarioConfig cfg = resolve_config(opts.preset, opts.config_path);
  if (opts.runs_override > 0) cfg.runs = opts.runs_override;
  if (opts.seed_set) cfg.seed = static_cast<uint64_t>(opts.seed_override);

  if (opts.dump_config) {
    std::cout << serialize_scenario_config(cfg) << "\n";
    return kExitOk;
  }

  const bool with_ba = opts.filter != "bearing_only";
  const bool with_bo = opts.filter != "bearing_angle";
  const Provenance prov = make_provenance(cfg);
  const std::filesystem::path out_dir(opts.out_dir);

  auto sink = [&](int i, const RunRecord& rec) {
    const bool want = opts.series == "all" || (opts.series == "first" && i == 0);
    if (!want) return;
    char name[32];
    std::snprintf(name, sizeof(name), "run_%03d.csv", i);
    Provenance run_prov = prov;
    run_prov.seed = rec.seed;
    write_text_atomic(out_dir / name, run_record_csv(rec, run_prov, with_ba, with_bo));
  };

  const MonteCarloSummary summary = monte_carlo(cfg, cfg.runs, sink);
  write_text_atomic(out_dir / "aggregate.csv", aggregate_csv(summary, prov, with_ba, with_bo));
  write_text_atomic(out_dir / "metrics.json",
                    metrics_json(cfg, summary, prov, with_ba, with_bo));

  std::cout << "scenario " << cfg.name << ": " << summary.completed_runs << "/"
            << summary.requested_runs << " runs completed, " << summary.t.size()
            << " steps each\n";
  auto report_mode = [&](const char* label, const ModeAggregate& agg) {
    std::cout << "  " << label << ": final_window_pos_err=" << agg.final_window_pos_err
              << " diverged=" << (agg.diverged ? "yes" : "no") << "\n";
  };
  if (summary.completed_runs > 0) {
    if (with_ba) report_mode("bearing_angle", summary.bearing_angle);
    if (with_bo) report_mode("bearing_only", summary.bearing_only);
  }
  std::cout << "wrote " << (out_dir / "aggregate.csv").string() << ", "
            << (out_dir / "metrics.json").string() << "\n";

  if (!summary.failures.empty()) {
    for (const auto& f : summary.failures) {
      std::cerr << "run " << f.run << " (seed " << f.seed << ") failed at step " << f.step
                << ": " << f.reason << "\n";
    }
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_observability(const ObservabilityOptions& opts) {
  ObservationWindow window;
  int target_order = opts.target_order;
  Provenance prov;
  prov.tool_version = kVersion;
  prov.generated_at = iso8601_utc_now();

  if (!opts.window_path.empty()) {
    if (!opts.preset.empty() || !opts.config_path.empty()) {
      throw ConfigError("--window and --preset/--config are mutually exclusive");
    }
    if (opts.dump_config) throw ConfigError("--dump-config needs --preset or --config");
    std::ifstream in(opts.window_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + opts.window_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    prov.config_hash = fnv1a64_hex(buf.str());

    const MeasurementSeries series = read_measurement_series(opts.window_path, std::nullopt);
    window.times = series.t;
    window.observer_positions = series.observer_positions;
    window.bearings.reserve(series.measurements.size());
    window.angles.reserve(series.measurements.size());
    for (const auto& m : series.measurements) {
      window.bearings.push_back(m.bearing);
      window.angles.push_back(m.angle);
    }
    validate_window(window);
    if (target_order < 0) target_order = 1;
  } else {
    const ScenarioConfig cfg = resolve_config(opts.preset, opts.config_path);
    if (opts.dump_config) {
      std::cout << serialize_scenario_config(cfg) << "\n";
      return kExitOk;
    }
    if (opts.samples < 2) throw ConfigError("--samples must be >= 2");
    prov.config_hash = config_hash(cfg);
    prov.seed = cfg.seed;
    window = make_observation_window(cfg.target, cfg.observer, opts.samples, cfg.dt,
                                     cfg.size_profile.base_size);
    if (target_order < 0) {
      const auto* poly = std::get_if<PolynomialMotion>(&cfg.target);
      target_order = poly ? poly->order : 1;
    }
  }

  const Eigen::MatrixXd q = build_observability_matrix(window);
  const ObservabilityReport rank_report = analyze_rank(q, 7);

  json report;
  report["provenance"] = provenance_json(prov);
  report["window"] = {{"samples", window.size()},
                      {"dt", window.dt()},
                      {"t0", window.times.front()},
                      {"target_order", target_order}};
  json rank = {{"rank", rank_report.rank},
               {"state_dim", rank_report.full_dim},
               {"observable", rank_report.observable},
               {"verdict", rank_report.observable ? "observable" : "unobservable"},
               {"tolerance", rank_report.tolerance},
               {"singular_values", vector_json(rank_report.singular_values)}};
  json null_basis = json::array();
  for (int c = 0; c < rank_report.null_basis.cols(); ++c) {
    null_basis.push_back(vector_json(rank_report.null_basis.col(c)));
  }
  rank["null_basis"] = null_basis;
  report["rank"] = rank;

  const StackedSystem sys = stack_discrete_system(window, target_order);
  json recovery;
  try {
    const RecoveredSolution sol = recover_motion(sys);
    recovery["status"] = "ok";
    recovery["size"] = sol.size;
    recovery["relative_coefficients"] = vec3_list_json(sol.relative_coefficients);
    recovery["target_coefficients"] = vec3_list_json(recovered_target_coefficients(sol));
    recovery["observer_fit"] = vec3_list_json(sol.observer_fit);
    recovery["residual_norm"] = sol.residual_norm;
    recovery["conditioning"] = sol.conditioning;
    recovery["t_origin"] = sol.t_origin;
    recovery["reconstructed_positions"] =
        vec3_list_json(recovered_target_positions(sol, window));
  } catch (const UnobservableError& err) {
    recovery["status"] = "rank_deficient";
    recovery["message"] = err.what();
    recovery["null_direction"] = vector_json(err.null_direction);
  }
  report["recovery"] = recovery;

  const std::string text = report.dump(2) + "\n";
  if (opts.out_path.empty()) {
    std::cout << text;
  } else {
    write_text_atomic(opts.out_path, text);
    std::cout << "wrote " << opts.out_path << "\n";
  }
  return kExitOk;
}

int cmd_estimate(const EstimateOptions& opts) {
  const ScenarioConfig cfg = resolve_config(opts.preset, opts.config_path);
  const FilterMode mode = opts.filter == "bearing_only" ? FilterMode::bearing_only
                                                        : FilterMode::bearing_angle;
  const FilterConfig fc = make_filter_config(cfg, mode);

  const std::optional<std::filesystem::path> observer_csv =
      opts.observer_path.empty() ? std::nullopt
                                 : std::optional<std::filesystem::path>(opts.observer_path);
  const MeasurementSeries series = read_measurement_series(opts.measurements_path, observer_csv);

  const TargetState init{cfg.filter.initial_position, cfg.filter.initial_velocity,
                         cfg.filter.initial_size};
  FilterState state = make_filter_state(init, cfg.filter.initial_covariance, mode,
                                        series.t.front());

  EstimateSeries out;
  out.mode = mode;
  const size_t n = series.t.size();
  out.t.reserve(n);
  out.states.reserve(n);
  out.cov_diags.reserve(n);
  out.flags.reserve(n);

  for (size_t i = 0; i < n; ++i) {
    if (i == 0) {
      // First sample is update-only: the prior is the configured initial estimate.
      const double r0 =
          std::max((state.position() - series.observer_positions[0]).norm(), fc.min_range);
      state = update(state,
                     build_pseudo_measurement(series.measurements[0],
                                              series.observer_positions[0], r0, fc),
                     fc);
      out.flags.emplace_back();
    } else {
      const double delta = series.t[i] - series.t[i - 1];
      const long steps = std::lround(delta / fc.dt);
      if (steps < 1 || std::abs(delta - static_cast<double>(steps) * fc.dt) > 1e-6) {
        throw ConfigError("measurement times must advance on the dt grid (dt=" +
                          std::to_string(fc.dt) + "), got a step of " +
                          std::to_string(delta) + " at t=" + std::to_string(series.t[i]));
      }
      // Missed samples are bridged by extra prediction steps.
      for (long m = 1; m < steps; ++m) state = predict(state, fc);
      state = step(state, series.measurements[i], series.observer_positions[i], fc);
      out.flags.push_back(steps > 1 ? "gap=" + std::to_string(steps - 1) : "");
    }
    out.t.push_back(series.t[i]);
    out.states.push_back(state.x);
    out.cov_diags.push_back(state.P.diagonal());
  }

  Provenance prov = make_provenance(cfg);
  write_text_atomic(opts.out_path, estimates_csv(out, prov));
  std::cout << "wrote " << opts.out_path << " (" << out.t.size() << " rows, "
            << (mode == FilterMode::bearing_angle ? "bearing_angle" : "bearing_only")
            << ")\n";
  return kExitOk;
}

}  // namespace bate::cli
