#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "ecbf/barrier.hpp"
#include "ecbf/controllers.hpp"
#include "ecbf/dynamics.hpp"
#include "ecbf/observer.hpp"

namespace ecbf {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything that determines one closed-loop run. Together with `seed` it fixes every logged
/// value bit for bit.
struct ScenarioConfig {
  double dt = 0.01;
  double horizon = 10.0;
  std::uint64_t seed = 0;
  double lane_width = 3.5;
  ControllerMode mode = ControllerMode::proposed;

  EgoState ego_init{0.0, 0.0, 0.0, 10.0};
  VehicleGeometry ego_geom;

  ObstacleState obstacle_init{18.0, 3.5, 0.0, 7.0};
  VehicleGeometry obstacle_geom;
  // Amplitude gives one 3.5 m lane change at 7 m/s.
  ManeuverConfig maneuver{4.0, 7.0, -0.141};

  EllipseParams ellipse;
  ClassK alpha;
  OperatingRegion region;
  ClfSpec clf;
  InputBounds bounds;

  MeasurementModel measurement;
  double theta = 0.5;
  double lambda = 0.8;
  GridSpec grid;
  // Precomputed gains; synthesized at run start when empty. Relative paths are resolved
  // against the directory of the config file.
  std::filesystem::path gains_file;
  // Until the observer transient has decayed the error bounds are scaled by this factor.
  double warmup_time = 1.0;
  double warmup_inflation = 1.5;

  // Raw sensor bounds used by the worst-case SOCP filter.
  ErrorBounds baseline_bounds{0.2, 0.5};

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  ControllerConfig controller_config() const;
  int num_steps() const;
};

/// Reads an INI file whose sections mirror ScenarioConfig. Keys that are absent keep their
/// defaults; unknown sections or keys are errors. Throws ConfigError with the path on failure.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Same format as load_config, from text. `base_dir` resolves a relative gains_file.
ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Serializes every field in the load_config format.
std::string format_config(const ScenarioConfig& cfg);

}  // namespace ecbf
