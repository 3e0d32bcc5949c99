#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecbf/conic_solvers.hpp"
#include "ecbf/controllers.hpp"
#include "ecbf/observer.hpp"
#include "ecbf/scenario_config.hpp"

namespace ecbf {

/// One control step: the state before the step and the input applied over it.
struct StepRecord {
  double t = 0.0;
  EgoState ego;
  ObstacleState obstacle;
  Eigen::Vector3d measurement = Eigen::Vector3d::Zero();  // (X_s, Y_s, v_s) with noise
  Eigen::Vector4d estimate = Eigen::Vector4d::Zero();     // observer state
  Eigen::Vector2d e_hat = Eigen::Vector2d::Zero();        // environment seen by the filter
  Eigen::Vector2d e_dot_hat = Eigen::Vector2d::Zero();
  double eps1 = 0.0;
  double eps2 = 0.0;
  double H_true = 0.0;
  double H_est = 0.0;
  double a = 0.0;
  double beta = 0.0;
  double delta_f = 0.0;
  Eigen::Vector3d slacks = Eigen::Vector3d::Zero();
  double margin = 0.0;
  bool sign_ok = true;
  double solve_us = 0.0;
  SolveStatus status = SolveStatus::optimal;
};

struct SimLog {
  ControllerMode mode = ControllerMode::proposed;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
};

struct RunSummary {
  ControllerMode mode = ControllerMode::proposed;
  std::uint64_t seed = 0;
  double min_H = 0.0;
  double mean_input_norm = 0.0;
  double max_input_norm = 0.0;
  double median_solve_us = 0.0;
  double p95_solve_us = 0.0;
  bool safety_violated = false;
  int infeasible_steps = 0;
  // max |x_s - x_hat| over t >= warmup_time
  double max_observer_error = 0.0;
};

/// Bounded measurement noise drawn uniformly from [-bound, bound] per channel. The sequence
/// depends only on the seed, so every controller sees the same realization.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, const MeasurementModel& measurement);

  Eigen::Vector3d next();

 private:
  double uniform(double bound);

  std::mt19937_64 rng_;
  MeasurementModel measurement_;
};

/// Gains from cfg.gains_file when set, otherwise a fresh synthesis.
ObserverGains prepare_gains(const ScenarioConfig& cfg);

SimLog run_scenario(const ScenarioConfig& cfg);
SimLog run_scenario(const ScenarioConfig& cfg, const ObserverGains& gains);

RunSummary summarize(const SimLog& log, const ScenarioConfig& cfg);

/// Nominal, robust-socp and proposed on one noise realization, in that order.
std::array<SimLog, 3> run_comparison(const ScenarioConfig& cfg, const ObserverGains& gains);

/// Seeds cfg.seed, cfg.seed + 1, ... run in parallel for cfg.mode. Result i equals the
/// summary of a standalone run with seed cfg.seed + i.
std::vector<RunSummary> run_batch(const ScenarioConfig& cfg, const ObserverGains& gains,
                                  int num_seeds, unsigned num_threads = 0);

/// Fixed-width comparison table: min H, mean |u|, median solve time per mode.
std::string format_summary_table(const std::vector<RunSummary>& rows);

}  // namespace ecbf
