#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "ecbf/barrier.hpp"
#include "ecbf/conic_solvers.hpp"
#include "ecbf/dynamics.hpp"
#include "ecbf/observer.hpp"

namespace ecbf {

/// Tracking objectives V_v = (v - v_d)^2, V_y = (Y - Y_l)^2, V_psi = psi^2 enforced as
/// relaxed CLF constraints with slack penalties p_j * rho_j^2.
struct ClfSpec {
  double v_d = 10.0;
  double Y_l = 3.5;
  double rate_v = 1.0;
  double rate_y = 1.0;
  double rate_psi = 1.0;
  double p_v = 1.0;
  double p_y = 10.0;
  double p_psi = 10.0;
};

struct InputBounds {
  double a_max = 3.0;
  double beta_max = 0.3;
};

struct ControllerConfig {
  EllipseParams ellipse;
  ClassK alpha;
  ClfSpec clf;
  VehicleGeometry geom;
  InputBounds bounds;
  SolverOptions solver;
  // Objective weight on hypograph auxiliaries; keeps Q strictly positive definite.
  double aux_weight = 1e-8;
};

enum class ControllerMode { nominal, robust_socp, proposed };

const char* to_string(ControllerMode mode);
/// Accepts "nominal", "robust-socp" and "proposed". Throws std::invalid_argument otherwise.
ControllerMode parse_mode(const std::string& text);

struct RobustConfig {
  ErrorBounds eps;
  LipschitzSet lipschitz;
  ControllerMode mode = ControllerMode::proposed;
};

/// L_f V + L_g V u <= -rate * V + rho
struct ClfConstraint {
  double V = 0.0;
  double LfV = 0.0;
  Eigen::Vector2d LgV = Eigen::Vector2d::Zero();
  double rate = 0.0;
};

/// Ordered (speed, lateral position, heading).
std::array<ClfConstraint, 3> clf_constraints(const EgoState& x, const ClfSpec& spec,
                                             const VehicleGeometry& geom);

/// a0 + L_G * u_xi >= 0 with u_xi = (a, beta, edot). Used by the nominal filter.
struct LinearBarrier {
  double a0 = 0.0;
  Eigen::Vector4d L_G = Eigen::Vector4d::Zero();
  Eigen::Vector2d e_dot = Eigen::Vector2d::Zero();

  double margin(const EgoInput& u) const;
};

/// a0 + L_G * u_xi >= || diag(weights) u_xi ||. Worst-case measurement baseline.
struct ConeBarrier {
  double a0 = 0.0;
  Eigen::Vector4d L_G = Eigen::Vector4d::Zero();
  Eigen::Vector4d weights = Eigen::Vector4d::Zero();
  Eigen::Vector2d e_dot = Eigen::Vector2d::Zero();

  double margin(const EgoInput& u) const;
};

/// a0 + sum_i min(b_minus_i u_i, b_plus_i u_i) >= 0. Observer-based filter.
struct MinSumBarrier {
  double a0 = 0.0;
  Eigen::Vector4d b_minus = Eigen::Vector4d::Zero();
  Eigen::Vector4d b_plus = Eigen::Vector4d::Zero();
  Eigen::Vector2d e_dot = Eigen::Vector2d::Zero();

  double margin(const EgoInput& u) const;
  /// sign(b_minus) == sign(b_plus) on the decision components (a, beta).
  bool sign_condition_ok() const;
};

LinearBarrier nominal_barrier(const EgoState& x, const Eigen::Vector2d& e,
                              const Eigen::Vector2d& e_dot, const ControllerConfig& cfg);

ConeBarrier robust_socp_barrier(const EgoState& x, const Eigen::Vector2d& e,
                                const Eigen::Vector2d& e_dot, const ErrorBounds& raw_bounds,
                                const LipschitzSet& lip, const ControllerConfig& cfg);

MinSumBarrier proposed_barrier(const EgoState& x, const Eigen::Vector2d& e_hat,
                               const Eigen::Vector2d& e_dot_hat, const ErrorBounds& bounds,
                               const LipschitzSet& lip, const ControllerConfig& cfg);

struct ControllerOutput {
  EgoInput input;
  double delta_f = 0.0;
  Eigen::Vector3d slacks = Eigen::Vector3d::Zero();  // (rho_v, rho_y, rho_psi)
  double barrier_margin = 0.0;
  double objective = 0.0;
  double solve_time_us = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  bool sign_condition_ok = true;
  bool fallback = false;
};

/// Decision layout shared by all filters: (a, beta, rho_v, rho_y, rho_psi, auxiliaries...).
inline constexpr int kBaseVariables = 5;

/// Objective, CLF rows and box constraints common to every filter.
QpProblem base_problem(const EgoState& x, const ControllerConfig& cfg, int num_aux = 0);

/// Extracts (a, beta) and slacks, converts beta to a steering angle. A non-optimal solution
/// yields the fallback input: full braking with zero slip.
ControllerOutput finalize_output(const Solution& sol, const VehicleGeometry& geom,
                                 const InputBounds& bounds);

ControllerOutput nominal_step(const EgoState& x, const Eigen::Vector2d& e_meas,
                              const Eigen::Vector2d& e_dot_meas, const ControllerConfig& cfg);

ControllerOutput robust_socp_step(const EgoState& x, const Eigen::Vector2d& e_meas,
                                  const Eigen::Vector2d& e_dot_meas,
                                  const ErrorBounds& raw_bounds, const LipschitzSet& lip,
                                  const ControllerConfig& cfg);

ControllerOutput proposed_step(const EgoState& x, const Eigen::Vector2d& e_hat,
                               const Eigen::Vector2d& e_dot_hat, const ErrorBounds& bounds,
                               const LipschitzSet& lip, const ControllerConfig& cfg);

/// Dispatches on `robust.mode`; the nominal filter ignores the bounds.
ControllerOutput controller_step(const EgoState& x, const Eigen::Vector2d& e,
                                 const Eigen::Vector2d& e_dot, const RobustConfig& robust,
                                 const ControllerConfig& cfg);

}  // namespace ecbf
