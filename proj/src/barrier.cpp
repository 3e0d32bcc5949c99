#include "ecbf/barrier.hpp"

#include <algorithm>

namespace ecbf {

double eval_H(const AugmentedState& xi, const EllipseParams& ell) {
  const double dx = xi.x.X - xi.e(0);
  const double dy = xi.x.Y - xi.e(1);
  return ell.a_s() * dx * dx + ell.b_s() * dy * dy - 1.0;
}

BarrierEvaluation eval_barrier(const AugmentedState& xi, const EllipseParams& ell,
                               const VehicleGeometry& geom) {
  const Eigen::Vector4d x = xi.x.vec();
  const double dx = xi.x.X - xi.e(0);
  const double dy = xi.x.Y - xi.e(1);

  BarrierEvaluation out;
  out.H = eval_H(xi, ell);
  out.dH_dx << 2.0 * ell.a_s() * dx, 2.0 * ell.b_s() * dy, 0.0, 0.0;
  out.dH_de = -out.dH_dx.head<2>();
  out.L_F_H = out.dH_dx.dot(affine_drift(x));
  // G = [g(x); I], so the environment columns pick up dH/de directly.
  out.L_G_H.head<2>() = affine_input_matrix(x, geom).transpose() * out.dH_dx;
  out.L_G_H.tail<2>() = out.dH_de;
  out.L_Gd_H = out.dH_de;
  return out;
}

LipschitzSet lipschitz_bounds(const OperatingRegion& region, const EllipseParams& ell,
                              const ClassK& alpha, const VehicleGeometry& /*geom*/) {
  const double k = std::max(ell.a_s(), ell.b_s());
  LipschitzSet lip;
  lip.L_LF = 2.0 * region.v_max * k;
  lip.L_Gd = 2.0 * k;
  // |H(e) - H(e')| <= k * |e - e'| * (|p - e| + |p - e'|) with both distances <= rho_max.
  lip.L_aH = alpha.gamma * 2.0 * k * region.rho_max;
  lip.L_G << 0.0, 2.0 * region.v_max * k, 2.0 * ell.a_s(), 2.0 * ell.b_s();
  return lip;
}

}  // namespace ecbf
