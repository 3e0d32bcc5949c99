#include "ecbf/dynamics.hpp"

#include <numbers>

namespace ecbf {

double steer_to_slip(double delta_f, const VehicleGeometry& geom) {
  return std::atan(geom.l_r / (geom.l_f + geom.l_r) * std::tan(delta_f));
}

double slip_to_steer(double beta, const VehicleGeometry& geom) {
  if (!(std::abs(beta) < std::numbers::pi / 2)) {
    throw std::domain_error("slip_to_steer: |beta| must be below pi/2");
  }
  return std::atan((geom.l_f + geom.l_r) / geom.l_r * std::tan(beta));
}

Eigen::Vector4d nonlinear_derivative(const Eigen::Vector4d& x, const SteeringInput& u,
                                     const VehicleGeometry& geom) {
  const double beta = steer_to_slip(u.delta_f, geom);
  const double v = x(kV);
  const double course = x(kPsi) + beta;
  return {v * std::cos(course), v * std::sin(course), v / geom.l_r * std::sin(beta), u.a};
}

Eigen::Vector4d affine_drift(const Eigen::Vector4d& x) {
  const double v = x(kV);
  return {v * std::cos(x(kPsi)), v * std::sin(x(kPsi)), 0.0, 0.0};
}

Eigen::Matrix<double, 4, 2> affine_input_matrix(const Eigen::Vector4d& x,
                                                const VehicleGeometry& geom) {
  const double v = x(kV);
  Eigen::Matrix<double, 4, 2> g;
  // clang-format off
  g << 0.0, -v * std::sin(x(kPsi)),
       0.0,  v * std::cos(x(kPsi)),
       0.0,  v / geom.l_r,
       1.0,  0.0;
  // clang-format on
  return g;
}

Eigen::Vector4d affine_derivative(const Eigen::Vector4d& x, const EgoInput& u,
                                  const VehicleGeometry& geom) {
  return affine_drift(x) + affine_input_matrix(x, geom) * u.vec();
}

ObstacleInput obstacle_maneuver(double t, const ManeuverConfig& maneuver) {
  if (t < maneuver.start || t > maneuver.end || maneuver.end <= maneuver.start) {
    return {0.0, 0.0};
  }
  const double phase = (t - maneuver.start) / (maneuver.end - maneuver.start);
  return {0.0, maneuver.steer_amplitude * std::sin(2.0 * std::numbers::pi * phase)};
}

}  // namespace ecbf
