#pragma once

#include <Eigen/Dense>

#include "ecbf/dynamics.hpp"

namespace ecbf {

/// Ellipsoidal unsafe set around the obstacle, aligned with the road axes.
struct EllipseParams {
  double r_a = 5.0;  // semi-major axis (longitudinal) [m]
  double r_b = 2.0;  // semi-minor axis (lateral) [m]

  double a_s() const { return 1.0 / (r_a * r_a); }
  double b_s() const { return 1.0 / (r_b * r_b); }
};

/// Linear class-K function alpha(s) = gamma * s.
struct ClassK {
  double gamma = 1.0;

  double operator()(double s) const { return gamma * s; }
};

/// Ego state joined with the environment state e = (X_s, Y_s).
struct AugmentedState {
  VehicleState x;
  Eigen::Vector2d e = Eigen::Vector2d::Zero();
};

/// H and every Lie-derivative term of the environment barrier condition at one state.
/// L_G_H is ordered (a, beta, edot_X, edot_Y).
struct BarrierEvaluation {
  double H = 0.0;
  Eigen::Vector4d dH_dx = Eigen::Vector4d::Zero();
  Eigen::Vector2d dH_de = Eigen::Vector2d::Zero();
  double L_F_H = 0.0;
  Eigen::Vector4d L_G_H = Eigen::Vector4d::Zero();
  Eigen::Vector2d L_Gd_H = Eigen::Vector2d::Zero();
};

/// Lipschitz constants, in the environment argument, of L_F H, ||L_Gd H||, alpha(H) and of
/// each component of L_G H (same ordering as BarrierEvaluation::L_G_H).
struct LipschitzSet {
  double L_LF = 0.0;
  double L_Gd = 0.0;
  double L_aH = 0.0;
  Eigen::Vector4d L_G = Eigen::Vector4d::Zero();
};

/// Region over which the Lipschitz constants are valid.
struct OperatingRegion {
  double v_max = 15.0;    // speeds in [0, v_max] [m/s]
  double rho_max = 30.0;  // ego-obstacle distance bound [m]
  double psi_max = 0.5;   // heading bound [rad]
};

double eval_H(const AugmentedState& xi, const EllipseParams& ell);

BarrierEvaluation eval_barrier(const AugmentedState& xi, const EllipseParams& ell,
                               const VehicleGeometry& geom);

LipschitzSet lipschitz_bounds(const OperatingRegion& region, const EllipseParams& ell,
                              const ClassK& alpha, const VehicleGeometry& geom);

}  // namespace ecbf
