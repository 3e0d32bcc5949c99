#include "ecbf/scenario_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ecbf {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid config: " + what);
}

bool finite_state(const VehicleState& s) {
  return std::isfinite(s.X) && std::isfinite(s.Y) && std::isfinite(s.psi) && std::isfinite(s.v);
}

}  // namespace

void ScenarioConfig::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "sim.dt must be > 0");
  require(std::isfinite(horizon) && horizon >= dt, "sim.horizon must be >= dt");
  require(lane_width > 0.0, "sim.lane_width must be > 0");
  require(finite_state(ego_init) && ego_init.v >= 0.0, "ego state must be finite with v >= 0");
  require(finite_state(obstacle_init) && obstacle_init.v >= 0.0,
          "obstacle state must be finite with v >= 0");
  require(ego_geom.l_f > 0.0 && ego_geom.l_r > 0.0, "ego l_f, l_r must be > 0");
  require(obstacle_geom.l_f > 0.0 && obstacle_geom.l_r > 0.0, "obstacle l_f, l_r must be > 0");
  require(maneuver.end >= maneuver.start, "obstacle.maneuver_end must be >= maneuver_start");
  require(std::abs(maneuver.steer_amplitude) <= M_PI / 4.0,
          "obstacle.steer_amplitude must be within pi/4");
  require(ellipse.r_a > 0.0 && ellipse.r_b > 0.0, "barrier.r_a, r_b must be > 0");
  require(alpha.gamma > 0.0, "barrier.gamma must be > 0");
  require(region.v_max > 0.0 && region.rho_max > 0.0 && region.psi_max > 0.0,
          "barrier operating region must be positive");
  require(clf.rate_v > 0.0 && clf.rate_y > 0.0 && clf.rate_psi > 0.0, "clf rates must be > 0");
  require(clf.p_v > 0.0 && clf.p_y > 0.0 && clf.p_psi > 0.0, "clf weights must be > 0");
  require(bounds.a_max > 0.0, "bounds.a_max must be > 0");
  require(bounds.beta_max > 0.0 && bounds.beta_max < M_PI / 2.0,
          "bounds.beta_max must be in (0, pi/2)");
  require(measurement.w_bar >= 0.0 && measurement.d_bar >= 0.0, "noise bounds must be >= 0");
  require(measurement.noise_gain_position > 0.0 && measurement.noise_gain_speed > 0.0,
          "noise gains must be > 0");
  require(theta >= 0.0, "observer.theta must be >= 0");
  require(lambda > 0.0, "observer.lambda must be > 0");
  require(!grid.v.empty() && !grid.psi.empty() && !grid.delta_f.empty(),
          "observer grid must be nonempty");
  require(warmup_time >= 0.0 && warmup_inflation >= 1.0,
          "observer warmup_time >= 0 and warmup_inflation >= 1 required");
  require(baseline_bounds.eps1 >= 0.0 && baseline_bounds.eps2 >= 0.0,
          "baseline eps1, eps2 must be >= 0");
}

ControllerConfig ScenarioConfig::controller_config() const {
  ControllerConfig c;
  c.ellipse = ellipse;
  c.alpha = alpha;
  c.clf = clf;
  c.geom = ego_geom;
  c.bounds = bounds;
  return c;
}

int ScenarioConfig::num_steps() const { return static_cast<int>(std::llround(horizon / dt)); }

namespace {

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ConfigError("invalid config: " + key + " expects a number, got '" + text + "'");
  }
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("invalid config: empty entry in " + key);
    out.push_back(to_double(key, item.substr(b, e - b + 1)));
  }
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    out += (i ? ", " : "") + std::string(buf);
  }
  return out;
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

struct Field {
  Setter set;
  std::function<std::string()> get;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Ordered (section, key) table shared by the parser and the formatter.
std::vector<std::pair<std::string, Field>> field_table(ScenarioConfig& c,
                                                       const std::filesystem::path& base_dir) {
  std::vector<std::pair<std::string, Field>> t;
  auto num = [&t](const std::string& name, double& ref) {
    t.push_back({name, {[&ref](const std::string& k, const std::string& v) { ref = to_double(k, v); },
                        [&ref] { return fmt(ref); }}});
  };
  auto list = [&t](const std::string& name, std::vector<double>& ref) {
    t.push_back({name, {[&ref](const std::string& k, const std::string& v) { ref = to_list(k, v); },
                        [&ref] { return join(ref); }}});
  };

  num("sim.dt", c.dt);
  num("sim.horizon", c.horizon);
  t.push_back({"sim.seed",
               {[&c](const std::string& k, const std::string& v) {
                  const double d = to_double(k, v);
                  if (d < 0.0 || d != std::floor(d)) {
                    throw ConfigError("invalid config: " + k + " must be a nonnegative integer");
                  }
                  c.seed = std::stoull(v);
                },
                [&c] { return std::to_string(c.seed); }}});
  num("sim.lane_width", c.lane_width);
  t.push_back({"sim.mode",
               {[&c](const std::string& k, const std::string& v) {
                  try {
                    c.mode = parse_mode(v);
                  } catch (const std::invalid_argument& e) {
                    throw ConfigError("invalid config: " + k + ": " + e.what());
                  }
                },
                [&c] { return std::string(to_string(c.mode)); }}});

  num("ego.X", c.ego_init.X);
  num("ego.Y", c.ego_init.Y);
  num("ego.psi", c.ego_init.psi);
  num("ego.v", c.ego_init.v);
  num("ego.l_f", c.ego_geom.l_f);
  num("ego.l_r", c.ego_geom.l_r);

  num("obstacle.X", c.obstacle_init.X);
  num("obstacle.Y", c.obstacle_init.Y);
  num("obstacle.psi", c.obstacle_init.psi);
  num("obstacle.v", c.obstacle_init.v);
  num("obstacle.l_f", c.obstacle_geom.l_f);
  num("obstacle.l_r", c.obstacle_geom.l_r);
  num("obstacle.maneuver_start", c.maneuver.start);
  num("obstacle.maneuver_end", c.maneuver.end);
  num("obstacle.steer_amplitude", c.maneuver.steer_amplitude);

  num("barrier.r_a", c.ellipse.r_a);
  num("barrier.r_b", c.ellipse.r_b);
  num("barrier.gamma", c.alpha.gamma);
  num("barrier.v_max", c.region.v_max);
  num("barrier.rho_max", c.region.rho_max);
  num("barrier.psi_max", c.region.psi_max);

  num("clf.v_d", c.clf.v_d);
  num("clf.Y_l", c.clf.Y_l);
  num("clf.rate_v", c.clf.rate_v);
  num("clf.rate_y", c.clf.rate_y);
  num("clf.rate_psi", c.clf.rate_psi);
  num("clf.p_v", c.clf.p_v);
  num("clf.p_y", c.clf.p_y);
  num("clf.p_psi", c.clf.p_psi);

  num("bounds.a_max", c.bounds.a_max);
  num("bounds.beta_max", c.bounds.beta_max);

  num("noise.w_bar", c.measurement.w_bar);
  num("noise.d_bar", c.measurement.d_bar);
  num("noise.gain_position", c.measurement.noise_gain_position);
  num("noise.gain_speed", c.measurement.noise_gain_speed);

  num("observer.theta", c.theta);
  num("observer.lambda", c.lambda);
  list("observer.grid_v", c.grid.v);
  list("observer.grid_psi", c.grid.psi);
  list("observer.grid_delta_f", c.grid.delta_f);
  t.push_back({"observer.gains_file",
               {[&c, base_dir](const std::string&, const std::string& v) {
                  std::filesystem::path p(v);
                  c.gains_file = (p.is_relative() && !v.empty()) ? base_dir / p : p;
                },
                [&c] { return c.gains_file.string(); }}});
  num("observer.warmup_time", c.warmup_time);
  num("observer.warmup_inflation", c.warmup_inflation);

  num("baseline.eps1", c.baseline_bounds.eps1);
  num("baseline.eps2", c.baseline_bounds.eps2);
  return t;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }

  ScenarioConfig cfg;
  std::map<std::string, Setter> setters;
  for (auto& [name, field] : field_table(cfg, base_dir)) setters.emplace(name, field.set);

  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) {
      throw ConfigError("invalid config: key '" + section + "' outside of a section");
    }
    for (const auto& [key, value] : keys) {
      const std::string name = section + "." + key;
      const auto it = setters.find(name);
      if (it == setters.end()) throw ConfigError("invalid config: unknown key '" + name + "'");
      it->second(name, value.get_value<std::string>());
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_config(const ScenarioConfig& cfg) {
  ScenarioConfig copy = cfg;
  std::ostringstream out;
  std::string current;
  for (auto& [name, field] : field_table(copy, {})) {
    const auto dot = name.find('.');
    const std::string section = name.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    const std::string value = field.get();
    if (name == "observer.gains_file" && value.empty()) continue;
    out << name.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace ecbf
