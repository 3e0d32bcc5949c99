#include "ecbf/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "ecbf/matrix_io.hpp"

namespace ecbf {

NoiseStream::NoiseStream(std::uint64_t seed, const MeasurementModel& measurement)
    : rng_(seed), measurement_(measurement) {}

double NoiseStream::uniform(double bound) {
  // 53 random bits mapped onto [0, 1); avoids the implementation-defined std distributions.
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return bound * (2.0 * u - 1.0);
}

Eigen::Vector3d NoiseStream::next() {
  const double wx = uniform(measurement_.w_bar);
  const double wy = uniform(measurement_.w_bar);
  const double wv = uniform(measurement_.d_bar);
  return {wx, wy, wv};
}

ObserverGains prepare_gains(const ScenarioConfig& cfg) {
  if (!cfg.gains_file.empty()) return load_gains(cfg.gains_file);
  return synthesize_gains(cfg.grid.points(), cfg.measurement, cfg.theta, cfg.lambda,
                          cfg.obstacle_geom);
}

SimLog run_scenario(const ScenarioConfig& cfg) { return run_scenario(cfg, prepare_gains(cfg)); }

SimLog run_scenario(const ScenarioConfig& cfg, const ObserverGains& gains) {
  cfg.validate();
  const ControllerConfig ctrl = cfg.controller_config();
  const LipschitzSet lip = lipschitz_bounds(cfg.region, cfg.ellipse, cfg.alpha, cfg.ego_geom);
  const Eigen::MatrixXd C = cfg.measurement.output_matrix();
  NoiseStream noise(cfg.seed, cfg.measurement);

  SimLog log;
  log.mode = cfg.mode;
  log.seed = cfg.seed;
  const int n = cfg.num_steps();
  log.steps.reserve(n);

  Eigen::Vector4d ego = cfg.ego_init.vec();
  Eigen::Vector4d obstacle = cfg.obstacle_init.vec();
  ObserverState obs;

  for (int k = 0; k < n; ++k) {
    const double t = k * cfg.dt;
    const ObstacleInput u_s = obstacle_maneuver(t, cfg.maneuver);
    const Eigen::Vector3d y = C * obstacle + noise.next();
    if (k == 0) obs = initialize_observer(y, cfg.obstacle_init.psi, gains, cfg.measurement);

    StepRecord rec;
    rec.t = t;
    rec.ego = EgoState::from(ego);
    rec.obstacle = ObstacleState::from(obstacle);
    rec.measurement = y;
    rec.estimate = obs.x_hat;

    RobustConfig robust;
    robust.mode = cfg.mode;
    robust.lipschitz = lip;
    if (cfg.mode == ControllerMode::proposed) {
      const EnvironmentEstimate env = estimate_environment(obs, u_s, cfg.obstacle_geom);
      rec.e_hat = env.e;
      rec.e_dot_hat = env.e_dot;
      robust.eps = error_bounds(obs, cfg.region);
      if (t < cfg.warmup_time) {
        robust.eps.eps1 *= cfg.warmup_inflation;
        robust.eps.eps2 *= cfg.warmup_inflation;
      }
    } else {
      // Raw measurement; the unmeasured heading is taken along the road.
      rec.e_hat = y.head<2>();
      rec.e_dot_hat = {y(2), 0.0};
      if (cfg.mode == ControllerMode::robust_socp) robust.eps = cfg.baseline_bounds;
    }
    rec.eps1 = robust.eps.eps1;
    rec.eps2 = robust.eps.eps2;

    const ControllerOutput out =
        controller_step(rec.ego, rec.e_hat, rec.e_dot_hat, robust, ctrl);
    rec.H_true = eval_H({rec.ego, obstacle.head<2>()}, cfg.ellipse);
    rec.H_est = eval_H({rec.ego, rec.e_hat}, cfg.ellipse);
    rec.a = out.input.a;
    rec.beta = out.input.beta;
    rec.delta_f = out.delta_f;
    rec.slacks = out.slacks;
    rec.margin = out.barrier_margin;
    rec.sign_ok = out.sign_condition_ok;
    rec.solve_us = out.solve_time_us;
    rec.status = out.status;
    log.steps.push_back(rec);

    const SteeringInput u_ego{out.input.a, out.delta_f};
    auto ego_rhs = [&](const Eigen::Vector4d& x, const SteeringInput& u) -> Eigen::Vector4d {
      return nonlinear_derivative(x, u, cfg.ego_geom);
    };
    auto obstacle_rhs = [&](const Eigen::Vector4d& x, const SteeringInput& u) -> Eigen::Vector4d {
      return nonlinear_derivative(x, u, cfg.obstacle_geom);
    };
    ego = integrate_step(ego_rhs, ego, u_ego, cfg.dt);
    obstacle = integrate_step(obstacle_rhs, obstacle, u_s, cfg.dt);
    obs = observer_step(obs, y, u_s, gains, cfg.measurement, cfg.obstacle_geom, cfg.dt);
  }
  return log;
}

namespace {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

RunSummary summarize(const SimLog& log, const ScenarioConfig& cfg) {
  RunSummary s;
  s.mode = log.mode;
  s.seed = log.seed;
  s.min_H = std::numeric_limits<double>::infinity();
  std::vector<double> times;
  times.reserve(log.steps.size());
  double norm_sum = 0.0;
  for (const StepRecord& r : log.steps) {
    s.min_H = std::min(s.min_H, r.H_true);
    const double un = std::hypot(r.a, r.beta);
    norm_sum += un;
    s.max_input_norm = std::max(s.max_input_norm, un);
    times.push_back(r.solve_us);
    if (r.status != SolveStatus::optimal) ++s.infeasible_steps;
    if (r.t >= cfg.warmup_time) {
      s.max_observer_error =
          std::max(s.max_observer_error, (r.obstacle.vec() - r.estimate).norm());
    }
  }
  if (!log.steps.empty()) s.mean_input_norm = norm_sum / static_cast<double>(log.steps.size());
  s.median_solve_us = percentile(times, 0.5);
  s.p95_solve_us = percentile(times, 0.95);
  s.safety_violated = !(s.min_H > 0.0);
  return s;
}

std::array<SimLog, 3> run_comparison(const ScenarioConfig& cfg, const ObserverGains& gains) {
  std::array<SimLog, 3> logs;
  const ControllerMode modes[3] = {ControllerMode::nominal, ControllerMode::robust_socp,
                                   ControllerMode::proposed};
  for (int i = 0; i < 3; ++i) {
    ScenarioConfig c = cfg;
    c.mode = modes[i];
    logs[i] = run_scenario(c, gains);
  }
  return logs;
}

std::vector<RunSummary> run_batch(const ScenarioConfig& cfg, const ObserverGains& gains,
                                  int num_seeds, unsigned num_threads) {
  cfg.validate();
  std::vector<RunSummary> out(std::max(num_seeds, 0));
  if (num_threads == 0) num_threads = std::max(1u, std::thread::hardware_concurrency());
  num_threads = std::min<unsigned>(num_threads, static_cast<unsigned>(out.size()));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < num_seeds; i = next++) {
      ScenarioConfig c = cfg;
      c.seed = cfg.seed + static_cast<std::uint64_t>(i);
      out[i] = summarize(run_scenario(c, gains), c);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < num_threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

std::string format_summary_table(const std::vector<RunSummary>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %6s %12s %12s %12s %16s %10s\n", "mode", "seed", "min_H",
                "mean_|u|", "max_|u|", "median_solve_us", "infeasible");
  out += buf;
  for (const RunSummary& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %6llu %12.6f %12.6f %12.6f %16.2f %10d\n",
                  to_string(r.mode), static_cast<unsigned long long>(r.seed), r.min_H,
                  r.mean_input_norm, r.max_input_norm, r.median_solve_us, r.infeasible_steps);
    out += buf;
  }
  return out;
}

}  // namespace ecbf
