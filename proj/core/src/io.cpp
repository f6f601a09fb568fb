#include "bate/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bate/errors.hpp"
#include "bate/version.hpp"

namespace bate {

namespace {

using nlohmann::json;

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void append_row(std::string& out, const std::vector<double>& values,
                const std::string& flags, bool with_flags) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_g17(values[i]);
  }
  if (with_flags) {
    out += ',';
    out += flags;
  }
  out += '\n';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct CsvFile {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  CsvFile csv;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      csv.columns = split_csv_line(line);
      have_header = true;
      continue;
    }
    auto cells = split_csv_line(line);
    if (cells.size() != csv.columns.size()) {
      throw ConfigError("'" + path.string() + "': row has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(csv.columns.size()));
    }
    csv.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ConfigError("'" + path.string() + "': no header row");
  return csv;
}

size_t column_index(const CsvFile& csv, const std::string& name,
                    const std::filesystem::path& path) {
  for (size_t i = 0; i < csv.columns.size(); ++i) {
    if (csv.columns[i] == name) return i;
  }
  throw ConfigError("'" + path.string() + "': missing column '" + name + "'");
}

double parse_cell(const std::string& cell, const std::string& col) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw ConfigError("column '" + col + "': cannot parse number '" + cell + "'");
  }
  return v;
}

json provenance_json(const Provenance& prov) {
  return {{"tool_version", prov.tool_version},
          {"config_hash", prov.config_hash},
          {"seed", prov.seed},
          {"generated_at", prov.generated_at}};
}

json mode_metrics_json(const ModeAggregate& agg, bool with_size) {
  json m = {{"final_step_pos_err", agg.final_step_pos_err},
            {"final_window_pos_err", agg.final_window_pos_err},
            {"diverged", agg.diverged}};
  if (with_size) m["final_size_err"] = agg.final_size_err;
  return m;
}

json mode_series_json(const ModeAggregate& agg, bool with_size) {
  json m = {{"pos_err_mean", agg.pos_err_mean},
            {"pos_rmse", agg.pos_rmse},
            {"vel_err_mean", agg.vel_err_mean},
            {"vel_rmse", agg.vel_rmse},
            {"avg_nees", agg.avg_nees}};
  if (with_size) {
    m["size_err_mean"] = agg.size_err_mean;
    m["size_rmse"] = agg.size_rmse;
  }
  return m;
}

}  // namespace

Provenance make_provenance(const ScenarioConfig& cfg) {
  Provenance prov;
  prov.tool_version = kVersion;
  prov.config_hash = config_hash(cfg);
  prov.seed = cfg.seed;
  prov.generated_at = iso8601_utc_now();
  return prov;
}

std::string format_g17(double v) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.good()) throw NumericError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string provenance_comment_block(const Provenance& prov) {
  std::string out;
  out += "# tool-version: " + prov.tool_version + "\n";
  out += "# config-hash: " + prov.config_hash + "\n";
  out += "# seed: " + std::to_string(prov.seed) + "\n";
  out += "# generated-at: " + prov.generated_at + "\n";
  return out;
}

std::string run_record_csv(const RunRecord& rec, const Provenance& prov, bool with_ba,
                           bool with_bo) {
  std::string out = provenance_comment_block(prov);
  out += "t,tx,ty,tz,tvx,tvy,tvz,tsize,pox,poy,poz,povx,povy,povz,gx,gy,gz,theta";
  if (with_ba) {
    out += ",ba_px,ba_py,ba_pz,ba_vx,ba_vy,ba_vz,ba_ell";
    for (int i = 0; i < 7; ++i) out += ",ba_P" + std::to_string(i) + std::to_string(i);
    out += ",ba_cov_trace,ba_nees";
  }
  if (with_bo) {
    out += ",bo_px,bo_py,bo_pz,bo_vx,bo_vy,bo_vz";
    for (int i = 0; i < 6; ++i) out += ",bo_P" + std::to_string(i) + std::to_string(i);
    out += ",bo_cov_trace,bo_nees";
  }
  out += '\n';
  std::vector<double> row;
  for (const StepRecord& s : rec.steps) {
    row.clear();
    row.push_back(s.t);
    for (int i = 0; i < 3; ++i) row.push_back(s.target_position(i));
    for (int i = 0; i < 3; ++i) row.push_back(s.target_velocity(i));
    row.push_back(s.target_size);
    for (int i = 0; i < 3; ++i) row.push_back(s.observer_position(i));
    for (int i = 0; i < 3; ++i) row.push_back(s.observer_velocity(i));
    for (int i = 0; i < 3; ++i) row.push_back(s.meas.bearing(i));
    row.push_back(s.meas.angle);
    if (with_ba) {
      for (int i = 0; i < 7; ++i) row.push_back(s.ba_state(i));
      for (int i = 0; i < 7; ++i) row.push_back(s.ba_cov_diag(i));
      row.push_back(s.ba_cov_trace);
      row.push_back(s.ba_nees);
    }
    if (with_bo) {
      for (int i = 0; i < 6; ++i) row.push_back(s.bo_state(i));
      for (int i = 0; i < 6; ++i) row.push_back(s.bo_cov_diag(i));
      row.push_back(s.bo_cov_trace);
      row.push_back(s.bo_nees);
    }
    append_row(out, row, "", false);
  }
  return out;
}

std::string aggregate_csv(const MonteCarloSummary& summary, const Provenance& prov,
                          bool with_ba, bool with_bo) {
  std::string out = provenance_comment_block(prov);
  out += "t";
  if (with_ba) {
    out += ",ba_pos_err_mean,ba_pos_rmse,ba_vel_err_mean,ba_vel_rmse,"
           "ba_size_err_mean,ba_size_rmse,ba_avg_nees";
  }
  if (with_bo) {
    out += ",bo_pos_err_mean,bo_pos_rmse,bo_vel_err_mean,bo_vel_rmse,bo_avg_nees";
  }
  out += '\n';
  std::vector<double> row;
  for (size_t k = 0; k < summary.t.size(); ++k) {
    row.clear();
    row.push_back(summary.t[k]);
    if (with_ba) {
      const ModeAggregate& a = summary.bearing_angle;
      row.insert(row.end(), {a.pos_err_mean[k], a.pos_rmse[k], a.vel_err_mean[k],
                             a.vel_rmse[k], a.size_err_mean[k], a.size_rmse[k],
                             a.avg_nees[k]});
    }
    if (with_bo) {
      const ModeAggregate& a = summary.bearing_only;
      row.insert(row.end(), {a.pos_err_mean[k], a.pos_rmse[k], a.vel_err_mean[k],
                             a.vel_rmse[k], a.avg_nees[k]});
    }
    append_row(out, row, "", false);
  }
  return out;
}

std::string metrics_json(const ScenarioConfig& cfg, const MonteCarloSummary& summary,
                         const Provenance& prov, bool with_ba, bool with_bo) {
  json root;
  root["provenance"] = provenance_json(prov);
  root["scenario"] = cfg.name;
  root["runs"] = {{"requested", summary.requested_runs},
                  {"completed", summary.completed_runs},
                  {"failed", summary.requested_runs - summary.completed_runs}};
  json failures = json::array();
  for (const FailureInfo& f : summary.failures) {
    failures.push_back(
        {{"run", f.run}, {"seed", f.seed}, {"step", f.step}, {"reason", f.reason}});
  }
  root["failures"] = failures;
  json modes;
  if (with_ba) modes["bearing_angle"] = mode_metrics_json(summary.bearing_angle, true);
  if (with_bo) modes["bearing_only"] = mode_metrics_json(summary.bearing_only, false);
  root["modes"] = modes;
  json per_step;
  per_step["t"] = summary.t;
  if (with_ba) per_step["bearing_angle"] = mode_series_json(summary.bearing_angle, true);
  if (with_bo) per_step["bearing_only"] = mode_series_json(summary.bearing_only, false);
  root["per_step"] = per_step;
  return root.dump(2) + "\n";
}

std::string estimates_csv(const EstimateSeries& series, const Provenance& prov) {
  const bool ba = series.mode == FilterMode::bearing_angle;
  std::string out = provenance_comment_block(prov);
  out += "t,ptx,pty,ptz,vtx,vty,vtz";
  if (ba) out += ",ell";
  const int n = ba ? 7 : 6;
  for (int i = 0; i < n; ++i) out += ",P" + std::to_string(i) + std::to_string(i);
  out += ",flags\n";
  std::vector<double> row;
  for (size_t k = 0; k < series.t.size(); ++k) {
    row.clear();
    row.push_back(series.t[k]);
    for (int i = 0; i < n; ++i) row.push_back(series.states[k](i));
    for (int i = 0; i < n; ++i) row.push_back(series.cov_diags[k](i));
    append_row(out, row, series.flags[k], true);
  }
  return out;
}

MeasurementSeries read_measurement_series(
    const std::filesystem::path& measurements_csv,
    const std::optional<std::filesystem::path>& observer_csv) {
  const CsvFile csv = read_csv(measurements_csv);
  MeasurementSeries series;
  const size_t ct = column_index(csv, "t", measurements_csv);
  const size_t cgx = column_index(csv, "gx", measurements_csv);
  const size_t cgy = column_index(csv, "gy", measurements_csv);
  const size_t cgz = column_index(csv, "gz", measurements_csv);
  const size_t cth = column_index(csv, "theta", measurements_csv);
  for (const auto& r : csv.rows) {
    series.t.push_back(parse_cell(r[ct], "t"));
    Measurement m;
    m.bearing = Eigen::Vector3d(parse_cell(r[cgx], "gx"), parse_cell(r[cgy], "gy"),
                                parse_cell(r[cgz], "gz"));
    m.angle = parse_cell(r[cth], "theta");
    series.measurements.push_back(m);
  }

  if (observer_csv) {
    const CsvFile ocsv = read_csv(*observer_csv);
    const size_t ot = column_index(ocsv, "t", *observer_csv);
    const size_t ox = column_index(ocsv, "pox", *observer_csv);
    const size_t oy = column_index(ocsv, "poy", *observer_csv);
    const size_t oz = column_index(ocsv, "poz", *observer_csv);
    if (ocsv.rows.size() != csv.rows.size()) {
      throw ConfigError("observer file row count does not match measurements");
    }
    for (size_t i = 0; i < ocsv.rows.size(); ++i) {
      if (std::abs(parse_cell(ocsv.rows[i][ot], "t") - series.t[i]) > 1e-9) {
        throw ConfigError("observer file time grid does not match measurements");
      }
      series.observer_positions.emplace_back(parse_cell(ocsv.rows[i][ox], "pox"),
                                             parse_cell(ocsv.rows[i][oy], "poy"),
                                             parse_cell(ocsv.rows[i][oz], "poz"));
    }
  } else {
    const size_t cx = column_index(csv, "pox", measurements_csv);
    const size_t cy = column_index(csv, "poy", measurements_csv);
    const size_t cz = column_index(csv, "poz", measurements_csv);
    for (const auto& r : csv.rows) {
      series.observer_positions.emplace_back(parse_cell(r[cx], "pox"),
                                             parse_cell(r[cy], "poy"),
                                             parse_cell(r[cz], "poz"));
    }
  }
  if (series.t.size() < 2) throw ConfigError("measurement file needs at least 2 rows");
  return series;
}

}  // namespace bate
