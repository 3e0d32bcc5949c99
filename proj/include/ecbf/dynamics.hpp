#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace ecbf {

/// Distances from the center of gravity to the front and rear axles [m].
struct VehicleGeometry {
  double l_f = 1.2;
  double l_r = 1.6;
};

/// Planar kinematic state of a single-track vehicle.
struct VehicleState {
  double X = 0.0;    // longitudinal position [m]
  double Y = 0.0;    // lateral position [m]
  double psi = 0.0;  // heading [rad]
  double v = 0.0;    // speed in the vehicle frame [m/s]

  Eigen::Vector4d vec() const { return {X, Y, psi, v}; }
  static VehicleState from(const Eigen::Vector4d& s) { return {s(0), s(1), s(2), s(3)}; }
};

using EgoState = VehicleState;
using ObstacleState = VehicleState;

/// Physical actuator inputs of the nonlinear model.
struct SteeringInput {
  double a = 0.0;        // acceleration at the CG [m/s^2]
  double delta_f = 0.0;  // front steering angle [rad]
};

using ObstacleInput = SteeringInput;

/// Inputs of the small-slip control-affine model used by the safety filters.
struct EgoInput {
  double a = 0.0;     // [m/s^2]
  double beta = 0.0;  // slip angle [rad]

  Eigen::Vector2d vec() const { return {a, beta}; }
};

// State vector indices.
inline constexpr int kX = 0;
inline constexpr int kY = 1;
inline constexpr int kPsi = 2;
inline constexpr int kV = 3;

double steer_to_slip(double delta_f, const VehicleGeometry& geom);

/// Inverse of steer_to_slip. Throws std::domain_error for |beta| >= pi/2.
double slip_to_steer(double beta, const VehicleGeometry& geom);

/// Exact single-track kinematics driven by (a, delta_f).
Eigen::Vector4d nonlinear_derivative(const Eigen::Vector4d& x, const SteeringInput& u,
                                     const VehicleGeometry& geom);

/// Drift term f(x) of the small-slip affine model.
Eigen::Vector4d affine_drift(const Eigen::Vector4d& x);

/// Input matrix g(x) of the small-slip affine model; columns act on (a, beta).
Eigen::Matrix<double, 4, 2> affine_input_matrix(const Eigen::Vector4d& x,
                                                const VehicleGeometry& geom);

/// f(x) + g(x) u.
Eigen::Vector4d affine_derivative(const Eigen::Vector4d& x, const EgoInput& u,
                                  const VehicleGeometry& geom);

/// Classical fourth-order Runge-Kutta step with the input held constant over [t, t + dt].
template <class State, class Input, class DerivativeFn>
State integrate_step(DerivativeFn&& f, const State& x, const Input& u, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("integrate_step: dt must be positive");
  }
  const State k1 = f(x, u);
  const State k2 = f(State(x + 0.5 * dt * k1), u);
  const State k3 = f(State(x + 0.5 * dt * k2), u);
  const State k4 = f(State(x + dt * k3), u);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Scripted lane change of the surrounding vehicle: one sinusoidal steering period over
/// [start, end], zero input outside. Speed is held constant.
struct ManeuverConfig {
  double start = 1.0;            // [s]
  double end = 4.0;              // [s]
  double steer_amplitude = 0.0;  // signed peak steering angle [rad]
};

ObstacleInput obstacle_maneuver(double t, const ManeuverConfig& maneuver);

}  // namespace ecbf
