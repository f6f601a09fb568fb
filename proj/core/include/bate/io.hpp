#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bate/config.hpp"
#include "bate/sim.hpp"

namespace bate {

/// Stamped into every output file. The timestamp is excluded from
/// determinism comparisons; everything after the comment block is the body.
struct Provenance {
  std::string tool_version;
  std::string config_hash;
  uint64_t seed = 0;
  std::string generated_at;  // ISO-8601 UTC
};

Provenance make_provenance(const ScenarioConfig& cfg);

/// Shortest exact decimal for doubles in CSV bodies (17 significant digits).
std::string format_g17(double v);

/// Writes to a temp file in the same directory, then renames into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string provenance_comment_block(const Provenance& prov);

/// Full per-run time series: truth, observer, measurement, and the selected
/// filter estimates with covariance diagonals.
std::string run_record_csv(const RunRecord& rec, const Provenance& prov, bool with_ba,
                           bool with_bo);

/// Per-step Monte-Carlo aggregates (means, RMSE, average NEES).
std::string aggregate_csv(const MonteCarloSummary& summary, const Provenance& prov,
                          bool with_ba, bool with_bo);

/// Summary metrics plus per-step RMSE arrays, as JSON.
std::string metrics_json(const ScenarioConfig& cfg, const MonteCarloSummary& summary,
                         const Provenance& prov, bool with_ba, bool with_bo);

/// Estimate series produced by replaying a measurement file.
struct EstimateSeries {
  FilterMode mode = FilterMode::bearing_angle;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> cov_diags;
  std::vector<std::string> flags;  // "" or "gap=<missing steps>"
};

std::string estimates_csv(const EstimateSeries& series, const Provenance& prov);

/// Uniform measurement stream parsed from CSV. Columns are located by name;
/// extra columns are ignored, missing ones are schema errors.
struct MeasurementSeries {
  std::vector<double> t;
  std::vector<Measurement> measurements;
  std::vector<Eigen::Vector3d> observer_positions;
};

/// Requires columns t,gx,gy,gz,theta and, unless `observer_csv` supplies
/// them on the same time grid, pox,poy,poz.
MeasurementSeries read_measurement_series(const std::filesystem::path& measurements_csv,
                                          const std::optional<std::filesystem::path>& observer_csv);

}  // namespace bate
