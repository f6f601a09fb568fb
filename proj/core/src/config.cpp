#include "bate/config.hpp"

#include <cmath>
#include <initializer_list>

#include <json.hpp>

#include "bate/errors.hpp"

namespace bate {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config error at " + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(path, "unknown key '" + it.key() + "'");
  }
}

double get_num(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

std::string get_str(const json& obj, const std::string& path, const char* key,
                    const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Eigen::Vector3d get_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected an array of 3 numbers");
  for (const auto& c : v) {
    if (!c.is_number()) fail(path, "expected an array of 3 numbers");
  }
  return Eigen::Vector3d(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

Eigen::Vector3d get_vec3_or(const json& obj, const std::string& path, const char* key,
                            const Eigen::Vector3d& fallback) {
  if (!obj.contains(key)) return fallback;
  return get_vec3(obj.at(key), path + "." + key);
}

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

AgentTrajectory parse_trajectory(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"kind", "order", "coefficients", "script", "guidance", "initial_position",
              "initial_velocity"});
  const std::string kind = get_str(obj, path, "kind", "");
  if (kind == "polynomial") {
    PolynomialMotion poly;
    poly.order = static_cast<int>(get_num(obj, path, "order", 0));
    if (!obj.contains("coefficients")) fail(path, "polynomial needs 'coefficients'");
    const json& cs = obj.at("coefficients");
    if (!cs.is_array() || cs.empty()) fail(path + ".coefficients", "expected a non-empty array");
    for (size_t j = 0; j < cs.size(); ++j) {
      poly.coefficients.push_back(
          get_vec3(cs[j], path + ".coefficients[" + std::to_string(j) + "]"));
    }
    return poly;
  }
  if (kind == "scripted") {
    if (!obj.contains("script")) fail(path, "scripted trajectory needs 'script'");
    const json& sc = obj.at("script");
    const std::string spath = path + ".script";
    check_keys(sc, spath, {"shape", "center", "radius", "angular_rate", "phase"});
    if (get_str(sc, spath, "shape", "circle") != "circle") {
      fail(spath + ".shape", "only 'circle' scripts are supported");
    }
    CircleScript circle;
    circle.center = get_vec3_or(sc, spath, "center", Eigen::Vector3d::Zero());
    circle.radius = get_num(sc, spath, "radius", 1.0);
    circle.angular_rate = get_num(sc, spath, "angular_rate", 1.0);
    circle.phase = get_num(sc, spath, "phase", 0.0);
    return circle;
  }
  if (kind == "guided") {
    if (!obj.contains("guidance")) fail(path, "guided trajectory needs 'guidance'");
    const json& gd = obj.at("guidance");
    const std::string gpath = path + ".guidance";
    check_keys(gd, gpath,
               {"law", "navigation_gain", "speed", "track_gain", "desired_range",
                "speed_limit"});
    GuidedMotion guided;
    const std::string law = get_str(gd, gpath, "law", "");
    if (law == "png") {
      guided.law.kind = GuidanceLaw::Kind::png;
    } else if (law == "range_tracking") {
      guided.law.kind = GuidanceLaw::Kind::range_tracking;
    } else {
      fail(gpath + ".law", "expected 'png' or 'range_tracking'");
    }
    guided.law.navigation_gain = get_num(gd, gpath, "navigation_gain", 1.0);
    guided.law.speed = get_num(gd, gpath, "speed", 3.0);
    guided.law.track_gain = get_num(gd, gpath, "track_gain", 3.0);
    guided.law.desired_range = get_num(gd, gpath, "desired_range", 3.0);
    guided.law.speed_limit = get_num(gd, gpath, "speed_limit", 3.0);
    guided.initial_position =
        get_vec3_or(obj, path, "initial_position", Eigen::Vector3d::Zero());
    guided.initial_velocity =
        get_vec3_or(obj, path, "initial_velocity", Eigen::Vector3d::Zero());
    return guided;
  }
  fail(path + ".kind", "expected 'polynomial', 'scripted', or 'guided'");
}

json trajectory_to_json(const AgentTrajectory& traj) {
  json obj;
  if (const auto* poly = std::get_if<PolynomialMotion>(&traj)) {
    obj["kind"] = "polynomial";
    obj["order"] = poly->order;
    json cs = json::array();
    for (const auto& c : poly->coefficients) cs.push_back(vec3_to_json(c));
    obj["coefficients"] = cs;
  } else if (const auto* circle = std::get_if<CircleScript>(&traj)) {
    obj["kind"] = "scripted";
    obj["script"] = {{"shape", "circle"},
                     {"center", vec3_to_json(circle->center)},
                     {"radius", circle->radius},
                     {"angular_rate", circle->angular_rate},
                     {"phase", circle->phase}};
  } else {
    const auto& guided = std::get<GuidedMotion>(traj);
    obj["kind"] = "guided";
    json gd;
    if (guided.law.kind == GuidanceLaw::Kind::png) {
      gd["law"] = "png";
      gd["navigation_gain"] = guided.law.navigation_gain;
      gd["speed"] = guided.law.speed;
    } else {
      gd["law"] = "range_tracking";
      gd["track_gain"] = guided.law.track_gain;
      gd["desired_range"] = guided.law.desired_range;
      gd["speed_limit"] = guided.law.speed_limit;
    }
    obj["guidance"] = gd;
    obj["initial_position"] = vec3_to_json(guided.initial_position);
    obj["initial_velocity"] = vec3_to_json(guided.initial_velocity);
  }
  return obj;
}

ScenarioConfig parse_scenario(const json& root) {
  const std::string path = "$";
  check_keys(root, path,
             {"name", "duration", "dt", "runs", "seed", "target", "observer",
              "size_profile", "noise", "filter", "angle_model", "stop_range",
              "divergence_threshold"});
  ScenarioConfig cfg;
  cfg.name = get_str(root, path, "name", cfg.name);
  cfg.duration = get_num(root, path, "duration", cfg.duration);
  cfg.dt = get_num(root, path, "dt", cfg.dt);
  cfg.runs = static_cast<int>(get_num(root, path, "runs", cfg.runs));
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_integer() && !s.is_number_unsigned()) {
      fail("$.seed", "expected an integer");
    }
    cfg.seed = s.get<uint64_t>();
  }
  if (root.contains("target")) cfg.target = parse_trajectory(root.at("target"), "$.target");
  if (root.contains("observer")) {
    cfg.observer = parse_trajectory(root.at("observer"), "$.observer");
  }
  if (root.contains("size_profile")) {
    const json& sp = root.at("size_profile");
    check_keys(sp, "$.size_profile", {"kind", "base_size", "spin_rate"});
    const std::string kind = get_str(sp, "$.size_profile", "kind", "constant");
    if (kind == "constant") {
      cfg.size_profile.kind = SizeProfile::Kind::constant;
    } else if (kind == "spinning_square") {
      cfg.size_profile.kind = SizeProfile::Kind::spinning_square;
    } else {
      fail("$.size_profile.kind", "expected 'constant' or 'spinning_square'");
    }
    cfg.size_profile.base_size = get_num(sp, "$.size_profile", "base_size", 1.0);
    cfg.size_profile.spin_rate = get_num(sp, "$.size_profile", "spin_rate", 0.0);
  }
  if (root.contains("noise")) {
    const json& nz = root.at("noise");
    check_keys(nz, "$.noise", {"sigma_mu", "sigma_w"});
    cfg.noise.sigma_mu = get_num(nz, "$.noise", "sigma_mu", cfg.noise.sigma_mu);
    cfg.noise.sigma_w = get_num(nz, "$.noise", "sigma_w", cfg.noise.sigma_w);
  }
  if (root.contains("filter")) {
    const json& ft = root.at("filter");
    check_keys(ft, "$.filter",
               {"sigma_v", "sigma_ell", "min_size", "min_range", "initial_position",
                "initial_velocity", "initial_size", "initial_covariance"});
    cfg.filter.sigma_v = get_num(ft, "$.filter", "sigma_v", cfg.filter.sigma_v);
    cfg.filter.sigma_ell = get_num(ft, "$.filter", "sigma_ell", cfg.filter.sigma_ell);
    cfg.filter.min_size = get_num(ft, "$.filter", "min_size", cfg.filter.min_size);
    cfg.filter.min_range = get_num(ft, "$.filter", "min_range", cfg.filter.min_range);
    cfg.filter.initial_position =
        get_vec3_or(ft, "$.filter", "initial_position", cfg.filter.initial_position);
    cfg.filter.initial_velocity =
        get_vec3_or(ft, "$.filter", "initial_velocity", cfg.filter.initial_velocity);
    cfg.filter.initial_size = get_num(ft, "$.filter", "initial_size", cfg.filter.initial_size);
    cfg.filter.initial_covariance =
        get_num(ft, "$.filter", "initial_covariance", cfg.filter.initial_covariance);
  }
  const std::string am = get_str(root, path, "angle_model", "exact");
  if (am == "exact") {
    cfg.angle_model = AngleModel::exact;
  } else if (am == "proportional") {
    cfg.angle_model = AngleModel::proportional;
  } else {
    fail("$.angle_model", "expected 'exact' or 'proportional'");
  }
  cfg.stop_range = get_num(root, path, "stop_range", cfg.stop_range);
  cfg.divergence_threshold =
      get_num(root, path, "divergence_threshold", cfg.divergence_threshold);
  validate_scenario(cfg);
  return cfg;
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config parse error: ") + err.what());
  }
  return parse_scenario(root);
}

std::string serialize_scenario_config(const ScenarioConfig& cfg, int indent) {
  json root;
  root["name"] = cfg.name;
  root["duration"] = cfg.duration;
  root["dt"] = cfg.dt;
  root["runs"] = cfg.runs;
  root["seed"] = cfg.seed;
  root["target"] = trajectory_to_json(cfg.target);
  root["observer"] = trajectory_to_json(cfg.observer);
  json sp;
  sp["kind"] = cfg.size_profile.kind == SizeProfile::Kind::constant ? "constant"
                                                                    : "spinning_square";
  sp["base_size"] = cfg.size_profile.base_size;
  if (cfg.size_profile.kind == SizeProfile::Kind::spinning_square) {
    sp["spin_rate"] = cfg.size_profile.spin_rate;
  }
  root["size_profile"] = sp;
  root["noise"] = {{"sigma_mu", cfg.noise.sigma_mu}, {"sigma_w", cfg.noise.sigma_w}};
  root["filter"] = {{"sigma_v", cfg.filter.sigma_v},
                    {"sigma_ell", cfg.filter.sigma_ell},
                    {"min_size", cfg.filter.min_size},
                    {"min_range", cfg.filter.min_range},
                    {"initial_position", vec3_to_json(cfg.filter.initial_position)},
                    {"initial_velocity", vec3_to_json(cfg.filter.initial_velocity)},
                    {"initial_size", cfg.filter.initial_size},
                    {"initial_covariance", cfg.filter.initial_covariance}};
  root["angle_model"] = cfg.angle_model == AngleModel::exact ? "exact" : "proportional";
  root["stop_range"] = cfg.stop_range;
  root["divergence_threshold"] = cfg.divergence_threshold;
  return root.dump(indent);
}

std::vector<std::string> preset_names() {
  return {"s1-circle", "s2-line", "s3-png", "s4-spin-circle", "s5-spin-approach",
          "track-follow"};
}

ScenarioConfig preset_config(const std::string& name) {
  const double inv_sqrt2 = 0.7071067811865476;
  ScenarioConfig cfg;
  cfg.name = name;
  if (name == "s1-circle" || name == "s4-spin-circle") {
    cfg.duration = 10.0;
    cfg.target = PolynomialMotion{0, {Eigen::Vector3d(0.0, 10.0, 0.0)}};
    CircleScript circle;
    circle.center = Eigen::Vector3d(0.0, 10.0, 0.0);
    circle.radius = 5.0;
    circle.angular_rate = 0.6;  // 3 m/s tangential speed
    circle.phase = -M_PI / 2.0;
    cfg.observer = circle;
    cfg.filter.initial_position = Eigen::Vector3d(0.0, 13.0, 0.0);
    cfg.filter.initial_size = 1.6;
    if (name == "s4-spin-circle") {
      cfg.size_profile.kind = SizeProfile::Kind::spinning_square;
      cfg.size_profile.spin_rate = 2.0 * M_PI;
    }
    return cfg;
  }
  if (name == "s2-line" || name == "s5-spin-approach") {
    cfg.duration = 8.0;
    cfg.target = PolynomialMotion{0, {Eigen::Vector3d(0.0, 10.0, 0.0)}};
    cfg.observer = PolynomialMotion{
        2,
        {Eigen::Vector3d(0.0, 5.0, 0.0), Eigen::Vector3d(0.0, 4.0, 0.0),
         Eigen::Vector3d(0.0, -1.0, 0.0)}};
    cfg.filter.initial_position = Eigen::Vector3d(0.0, 8.0, 0.0);
    cfg.filter.initial_size = 0.8;
    if (name == "s5-spin-approach") {
      cfg.size_profile.kind = SizeProfile::Kind::spinning_square;
      cfg.size_profile.spin_rate = M_PI / 8.0;
    }
    return cfg;
  }
  if (name == "s3-png") {
    cfg.duration = 15.0;
    cfg.stop_range = 0.5;
    cfg.target = PolynomialMotion{
        1, {Eigen::Vector3d(0.0, 10.0, 0.0), Eigen::Vector3d(inv_sqrt2, inv_sqrt2, 0.0)}};
    GuidedMotion guided;
    guided.law.kind = GuidanceLaw::Kind::png;
    guided.law.navigation_gain = 1.0;
    guided.law.speed = 3.0;
    guided.initial_position = Eigen::Vector3d(0.0, 5.0, 0.0);
    guided.initial_velocity = Eigen::Vector3d(0.0, 3.0, 0.0);
    cfg.observer = guided;
    cfg.filter.initial_position = Eigen::Vector3d(0.0, 13.0, 0.0);
    cfg.filter.initial_size = 1.6;
    return cfg;
  }
  if (name == "track-follow") {
    cfg.duration = 30.0;
    cfg.target = PolynomialMotion{
        1, {Eigen::Vector3d(0.0, 0.0, 10.0), Eigen::Vector3d(inv_sqrt2, inv_sqrt2, 0.0)}};
    GuidedMotion guided;
    guided.law.kind = GuidanceLaw::Kind::range_tracking;
    guided.law.track_gain = 3.0;
    guided.law.desired_range = 3.0;
    guided.law.speed_limit = 3.0;
    guided.initial_position =
        Eigen::Vector3d(-14.0 * inv_sqrt2, -14.0 * inv_sqrt2, 10.0);
    cfg.observer = guided;
    cfg.filter.initial_position = Eigen::Vector3d(0.0, 3.0, 10.0);
    cfg.filter.initial_size = 1.6;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::string config_hash(const ScenarioConfig& cfg) {
  const std::string canon = serialize_scenario_config(cfg, -1);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bate
