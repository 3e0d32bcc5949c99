// Command-line front end: run, compare, synth-gains, check.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecbf/csv_log.hpp"
#include "ecbf/matrix_io.hpp"
#include "ecbf/scenario_config.hpp"
#include "ecbf/simulation.hpp"
#include "ecbf/svg_plots.hpp"

namespace fs = std::filesystem;
using namespace ecbf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool record_timing = false;
};

ScenarioConfig load(const CommonArgs& args) {
  ScenarioConfig cfg = args.config.empty() ? ScenarioConfig{} : load_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

ObserverGains gains_for(const ScenarioConfig& cfg) {
  try {
    return prepare_gains(cfg);
  } catch (const InfeasibleSynthesis& e) {
    throw ConfigError(e.what());
  } catch (const std::runtime_error& e) {
    // Unreadable or malformed gain fixture.
    throw ConfigError(e.what());
  }
}

void ensure_dir(const std::string& out) {
  if (!out.empty()) fs::create_directories(out);
}

void print_distribution(const std::vector<RunSummary>& runs) {
  std::vector<double> h;
  int violations = 0;
  int infeasible = 0;
  for (const RunSummary& r : runs) {
    h.push_back(r.min_H);
    violations += r.safety_violated ? 1 : 0;
    infeasible += r.infeasible_steps;
  }
  std::sort(h.begin(), h.end());
  auto q = [&](double p) { return h[static_cast<std::size_t>(std::lround(p * (h.size() - 1)))]; };
  std::printf("min-H over %zu seeds (%s)\n", runs.size(), to_string(runs.front().mode));
  std::printf("  min %.6f  p05 %.6f  median %.6f  p95 %.6f  max %.6f\n", h.front(), q(0.05),
              q(0.5), q(0.95), h.back());
  std::printf("  runs with min H <= 0: %d   non-optimal steps: %d\n", violations, infeasible);
}

int cmd_run(const CommonArgs& args, const std::string& mode, int seeds) {
  ScenarioConfig cfg = load(args);
  if (!mode.empty()) {
    try {
      cfg.mode = parse_mode(mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  const ObserverGains gains = gains_for(cfg);
  if (seeds > 1) {
    const auto runs = run_batch(cfg, gains, seeds);
    print_distribution(runs);
    return kExitOk;
  }
  const SimLog log = run_scenario(cfg, gains);
  const RunSummary s = summarize(log, cfg);
  std::cout << format_summary_table({s});
  if (!args.out.empty()) {
    ensure_dir(args.out);
    const fs::path p = fs::path(args.out) / (std::string(to_string(cfg.mode)) + ".csv");
    write_csv(log, p, {args.record_timing});
    std::cout << "wrote " << p.string() << '\n';
  }
  return kExitOk;
}

int cmd_compare(const CommonArgs& args) {
  const ScenarioConfig cfg = load(args);
  const ObserverGains gains = gains_for(cfg);
  const auto logs = run_comparison(cfg, gains);
  std::vector<RunSummary> rows;
  for (const SimLog& log : logs) rows.push_back(summarize(log, cfg));
  std::cout << format_summary_table(rows);
  if (!args.out.empty()) {
    ensure_dir(args.out);
    for (const SimLog& log : logs) {
      write_csv(log, fs::path(args.out) / (std::string(to_string(log.mode)) + ".csv"),
                {args.record_timing});
    }
    const auto svgs = render_plots({logs.begin(), logs.end()}, cfg.ellipse,
                                   fs::path(args.out) / "compare");
    std::cout << "wrote 3 CSV files and " << svgs.size() << " SVG files to " << args.out << '\n';
  }
  return kExitOk;
}

int cmd_synth(const CommonArgs& args) {
  const ScenarioConfig cfg = load(args);
  ObserverGains gains;
  try {
    gains = synthesize_gains(cfg.grid.points(), cfg.measurement, cfg.theta, cfg.lambda,
                             cfg.obstacle_geom);
  } catch (const InfeasibleSynthesis& e) {
    throw ConfigError(e.what());
  }
  const ObserverModel model =
      build_observer_model(cfg.grid.points(), cfg.measurement, cfg.obstacle_geom);
  const LmiCheckResult check = lmi_check(gains, model, 1e-8);
  std::printf("theta %.3g  lambda %.3g  gain bound gamma %.6g\n", gains.theta, gains.lambda,
              gains.gamma_obj);
  std::printf("lmi_check: %s (worst: %s, %.3e)\n", check.ok ? "ok" : "FAILED",
              check.worst_constraint.c_str(), check.worst_violation);
  const fs::path out = args.out.empty() ? fs::path("observer_gains.txt") : fs::path(args.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_gains(out, gains);
  std::cout << "wrote " << out.string() << '\n';
  return check.ok ? kExitOk : kExitViolation;
}

// Invariant suite on the robust controllers: true-state safety, noise bounds, observer error
// ball, and self-consistency of every optimal barrier constraint.
int cmd_check(const CommonArgs& args, int seeds) {
  const ScenarioConfig base = load(args);
  const ObserverGains gains = gains_for(base);
  const double radius = gains.lambda * base.measurement.w_eff();
  int failures = 0;
  auto fail = [&](const std::string& what) {
    ++failures;
    std::cout << "FAIL " << what << '\n';
  };
  for (ControllerMode mode : {ControllerMode::robust_socp, ControllerMode::proposed}) {
    for (int i = 0; i < seeds; ++i) {
      ScenarioConfig cfg = base;
      cfg.mode = mode;
      cfg.seed = base.seed + static_cast<std::uint64_t>(i);
      const SimLog log = run_scenario(cfg, gains);
      const std::string tag =
          std::string(to_string(mode)) + " seed " + std::to_string(cfg.seed) + ": ";
      double min_h = INFINITY;
      for (const StepRecord& r : log.steps) {
        min_h = std::min(min_h, r.H_true);
        const Eigen::Vector3d w =
            r.measurement - Eigen::Vector3d(r.obstacle.X, r.obstacle.Y, r.obstacle.v);
        if (std::abs(w(0)) > cfg.measurement.w_bar || std::abs(w(1)) > cfg.measurement.w_bar ||
            std::abs(w(2)) > cfg.measurement.d_bar) {
          fail(tag + "noise bound exceeded at t=" + std::to_string(r.t));
          break;
        }
        if (r.status == SolveStatus::optimal && r.margin < -1e-8) {
          fail(tag + "barrier margin " + std::to_string(r.margin) + " at t=" + std::to_string(r.t));
          break;
        }
        if (mode == ControllerMode::proposed && r.t >= cfg.warmup_time &&
            (r.obstacle.vec() - r.estimate).norm() > radius) {
          fail(tag + "observer error outside the bound at t=" + std::to_string(r.t));
          break;
        }
      }
      if (!(min_h > 0.0)) fail(tag + "min H = " + std::to_string(min_h));
    }
  }
  std::printf("check: %d seeds x 2 robust controllers, %d failure(s)\n", seeds, failures);
  return failures == 0 ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observer-based robust ECBF safety filter: closed-loop vehicle scenario"};
  app.require_subcommand(1);

  CommonArgs args;
  std::uint64_t seed = 0;
  std::string mode;
  int seeds = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "scenario config file (INI)");
    sub->add_option("--seed", seed, "noise seed (overrides the config)");
    sub->add_option("--out", args.out, "output directory (gain file path for synth-gains)");
  };

  CLI::App* run = app.add_subcommand("run", "run one scenario with one controller");
  add_common(run);
  run->add_option("--mode", mode, "nominal | robust-socp | proposed");
  run->add_option("--seeds", seeds, "Monte-Carlo batch size")->check(CLI::PositiveNumber);
  run->add_flag("--record-timing", args.record_timing, "write measured solve times to the CSV");

  CLI::App* compare = app.add_subcommand("compare", "run all three controllers on one noise draw");
  add_common(compare);
  compare->add_flag("--record-timing", args.record_timing,
                    "write measured solve times to the CSVs");

  CLI::App* synth = app.add_subcommand("synth-gains", "synthesize observer gains to a fixture");
  add_common(synth);

  CLI::App* check = app.add_subcommand("check", "invariant suite on the robust controllers");
  add_common(check);
  seeds = 1;
  check->add_option("--seeds", seeds, "number of seeds")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }

  for (CLI::App* sub : {run, compare, synth, check}) {
    if (sub->count("--seed") > 0) args.seed = seed;
  }

  try {
    if (run->parsed()) return cmd_run(args, mode, seeds);
    if (compare->parsed()) return cmd_compare(args);
    if (synth->parsed()) return cmd_synth(args);
    if (check->parsed()) return cmd_check(args, seeds);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
