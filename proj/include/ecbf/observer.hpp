#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecbf/barrier.hpp"
#include "ecbf/dynamics.hpp"

namespace ecbf {

/// y = c(x_s) + c_w w with c selecting (X_s, Y_s, v_s). Position channels carry noise bounded
/// by w_bar, the speed channel by d_bar. `noise_gain_*` form the diagonal c_w used by the
/// attenuation LMI.
struct MeasurementModel {
  double w_bar = 0.2;
  double d_bar = 0.2;
  double noise_gain_position = 0.25;
  double noise_gain_speed = 0.25;

  static constexpr int kOutputs = 3;

  Eigen::MatrixXd output_matrix() const;
  Eigen::MatrixXd noise_matrix() const;
  /// Infinity-norm bound of the physical noise vector.
  double w_eff() const { return std::max(w_bar, d_bar); }
};

/// Linearization point of the obstacle model.
struct GridPoint {
  double v = 0.0;
  double psi = 0.0;
  double delta_f = 0.0;
};

struct GridSpec {
  std::vector<double> v{6.0, 8.0, 10.0};
  std::vector<double> psi{-0.2, 0.0, 0.2};
  std::vector<double> delta_f{-0.1, 0.0, 0.1};

  std::vector<GridPoint> points() const;
};

/// Data entering the synthesis LMIs: the Jacobians over the grid and the output/noise maps.
struct ObserverModel {
  std::vector<Eigen::MatrixXd> A_grid;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;
};

Eigen::Matrix4d obstacle_jacobian(const Eigen::Vector4d& x, const ObstacleInput& u,
                                  const VehicleGeometry& geom);

ObserverModel build_observer_model(const std::vector<GridPoint>& grid,
                                   const MeasurementModel& measurement,
                                   const VehicleGeometry& geom);

struct ObserverGains {
  Eigen::MatrixXd P;
  Eigen::MatrixXd R;
  Eigen::MatrixXd L;
  double theta = 0.0;
  double lambda = 0.0;
  double gamma_obj = 0.0;
};

class InfeasibleSynthesis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimizes gamma over (P, R) subject to
///   P - I >= 0,   [P R'; R gamma I] >= 0,
///   A'P + PA - C'R - R'C + 2 theta P <= 0                       for every A in the grid,
///   [A'P + PA - C'R - R'C + I, -R'D; -D'R, -lambda^2 I] <= 0   for every A in the grid,
/// and returns L = P^{-1} R'. Throws InfeasibleSynthesis when no strictly feasible (P, R)
/// exists, std::invalid_argument on bad parameters.
ObserverGains synthesize_gains(const ObserverModel& model, double theta, double lambda);

ObserverGains synthesize_gains(const std::vector<GridPoint>& grid,
                               const MeasurementModel& measurement, double theta, double lambda,
                               const VehicleGeometry& geom);

struct LmiCheckResult {
  bool ok = false;
  double worst_violation = 0.0;  // signed amount by which the worst LMI misses its sign
  std::string worst_constraint;
};

/// Independent eigenvalue check of every synthesis LMI. Throws std::invalid_argument on
/// inconsistent dimensions.
LmiCheckResult lmi_check(const ObserverGains& gains, const ObserverModel& model, double tol);

struct ObserverState {
  Eigen::Vector4d x_hat = Eigen::Vector4d::Zero();
  double err_radius = 0.0;
};

/// Starts the estimate at the measured position and speed; the unmeasured heading is set to
/// `heading_guess`.
ObserverState initialize_observer(const Eigen::Vector3d& y, double heading_guess,
                                  const ObserverGains& gains, const MeasurementModel& measurement);

/// One RK4 step of  xhat' = f_s(xhat, u_s) + L (y - C xhat)  with y and u_s held.
ObserverState observer_step(const ObserverState& obs, const Eigen::Vector3d& y,
                            const ObstacleInput& u_s, const ObserverGains& gains,
                            const MeasurementModel& measurement, const VehicleGeometry& geom,
                            double dt);

struct ErrorBounds {
  double eps1 = 0.0;  // bound on |e - e_hat|      [m]
  double eps2 = 0.0;  // bound on |edot - edot_hat| [m/s]
};

/// Lipschitz constant of (v cos(psi + beta), v sin(psi + beta)) in the obstacle state.
double velocity_map_lipschitz(const OperatingRegion& region);

ErrorBounds error_bounds(const ObserverState& obs, const OperatingRegion& region);

struct EnvironmentEstimate {
  Eigen::Vector2d e = Eigen::Vector2d::Zero();
  Eigen::Vector2d e_dot = Eigen::Vector2d::Zero();
};

EnvironmentEstimate estimate_environment(const ObserverState& obs, const ObstacleInput& u_s,
                                         const VehicleGeometry& geom);

}  // namespace ecbf
