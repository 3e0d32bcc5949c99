#include "ecbf/controllers.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace ecbf {

const char* to_string(ControllerMode mode) {
  switch (mode) {
    case ControllerMode::nominal:
      return "nominal";
    case ControllerMode::robust_socp:
      return "robust-socp";
    case ControllerMode::proposed:
      return "proposed";
  }
  return "unknown";
}

ControllerMode parse_mode(const std::string& text) {
  if (text == "nominal") return ControllerMode::nominal;
  if (text == "robust-socp") return ControllerMode::robust_socp;
  if (text == "proposed") return ControllerMode::proposed;
  throw std::invalid_argument("unknown controller mode '" + text +
                              "' (expected nominal, robust-socp or proposed)");
}

std::array<ClfConstraint, 3> clf_constraints(const EgoState& x, const ClfSpec& spec,
                                             const VehicleGeometry& geom) {
  const double dv = x.v - spec.v_d;
  const double dy = x.Y - spec.Y_l;
  std::array<ClfConstraint, 3> out;
  out[0] = {dv * dv, 0.0, {2.0 * dv, 0.0}, spec.rate_v};
  out[1] = {dy * dy, 2.0 * dy * x.v * std::sin(x.psi), {0.0, 2.0 * dy * x.v * std::cos(x.psi)},
            spec.rate_y};
  out[2] = {x.psi * x.psi, 0.0, {0.0, 2.0 * x.psi * x.v / geom.l_r}, spec.rate_psi};
  return out;
}

namespace {

Eigen::Vector4d augmented_input(const EgoInput& u, const Eigen::Vector2d& e_dot) {
  return {u.a, u.beta, e_dot(0), e_dot(1)};
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double LinearBarrier::margin(const EgoInput& u) const {
  return a0 + L_G.dot(augmented_input(u, e_dot));
}

double ConeBarrier::margin(const EgoInput& u) const {
  const Eigen::Vector4d uxi = augmented_input(u, e_dot);
  return a0 + L_G.dot(uxi) - weights.cwiseProduct(uxi).norm();
}

double MinSumBarrier::margin(const EgoInput& u) const {
  const Eigen::Vector4d uxi = augmented_input(u, e_dot);
  double total = a0;
  for (int i = 0; i < 4; ++i) total += std::min(b_minus(i) * uxi(i), b_plus(i) * uxi(i));
  return total;
}

bool MinSumBarrier::sign_condition_ok() const {
  return sign(b_minus(0)) == sign(b_plus(0)) && sign(b_minus(1)) == sign(b_plus(1));
}

LinearBarrier nominal_barrier(const EgoState& x, const Eigen::Vector2d& e,
                              const Eigen::Vector2d& e_dot, const ControllerConfig& cfg) {
  const BarrierEvaluation be = eval_barrier({x, e}, cfg.ellipse, cfg.geom);
  return {be.L_F_H + cfg.alpha(be.H), be.L_G_H, e_dot};
}

ConeBarrier robust_socp_barrier(const EgoState& x, const Eigen::Vector2d& e,
                                const Eigen::Vector2d& e_dot, const ErrorBounds& raw_bounds,
                                const LipschitzSet& lip, const ControllerConfig& cfg) {
  const BarrierEvaluation be = eval_barrier({x, e}, cfg.ellipse, cfg.geom);
  const double tightening =
      (lip.L_LF + lip.L_Gd * raw_bounds.eps2 + lip.L_aH) * raw_bounds.eps1;
  ConeBarrier cb;
  cb.a0 = be.L_F_H + cfg.alpha(be.H) - tightening - be.L_Gd_H.norm() * raw_bounds.eps2;
  cb.L_G = be.L_G_H;
  cb.weights = raw_bounds.eps1 * lip.L_G;
  cb.e_dot = e_dot;
  return cb;
}

MinSumBarrier proposed_barrier(const EgoState& x, const Eigen::Vector2d& e_hat,
                               const Eigen::Vector2d& e_dot_hat, const ErrorBounds& bounds,
                               const LipschitzSet& lip, const ControllerConfig& cfg) {
  const BarrierEvaluation be = eval_barrier({x, e_hat}, cfg.ellipse, cfg.geom);
  const double delta_a = (lip.L_LF + lip.L_Gd * bounds.eps2 + lip.L_aH) * bounds.eps1;
  const Eigen::Vector4d delta_b = lip.L_G * bounds.eps1;
  MinSumBarrier mb;
  mb.a0 = be.L_F_H - be.L_Gd_H.norm() * bounds.eps2 + cfg.alpha(be.H) - delta_a;
  mb.b_minus = be.L_G_H - delta_b;
  mb.b_plus = be.L_G_H + delta_b;
  mb.e_dot = e_dot_hat;
  return mb;
}

QpProblem base_problem(const EgoState& x, const ControllerConfig& cfg, int num_aux) {
  const int n = kBaseVariables + num_aux;
  QpProblem p;
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, cfg.aux_weight);
  weights.head<kBaseVariables>() << 1.0, 1.0, cfg.clf.p_v, cfg.clf.p_y, cfg.clf.p_psi;
  p.Q = weights.asDiagonal();
  p.q = Eigen::VectorXd::Zero(n);  // u_des = 0

  const auto clf = clf_constraints(x, cfg.clf, cfg.geom);
  p.G = Eigen::MatrixXd::Zero(3, n);
  p.h = Eigen::VectorXd::Zero(3);
  for (int j = 0; j < 3; ++j) {
    p.G(j, 0) = clf[j].LgV(0);
    p.G(j, 1) = clf[j].LgV(1);
    p.G(j, 2 + j) = -1.0;
    p.h(j) = -clf[j].rate * clf[j].V - clf[j].LfV;
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  p.lower = Eigen::VectorXd::Constant(n, -inf);
  p.upper = Eigen::VectorXd::Constant(n, inf);
  p.lower.head<kBaseVariables>() << -cfg.bounds.a_max, -cfg.bounds.beta_max, 0.0, 0.0, 0.0;
  p.upper.head<2>() << cfg.bounds.a_max, cfg.bounds.beta_max;
  return p;
}

ControllerOutput finalize_output(const Solution& sol, const VehicleGeometry& geom,
                                 const InputBounds& bounds) {
  ControllerOutput out;
  out.status = sol.status;
  out.solve_time_us = sol.solve_time_us;
  if (sol.status == SolveStatus::optimal) {
    out.input = {sol.x_star(0), sol.x_star(1)};
    out.slacks = sol.x_star.segment<3>(2);
    out.objective = sol.objective;
  } else {
    out.input = {-bounds.a_max, 0.0};
    out.fallback = true;
  }
  out.delta_f = slip_to_steer(out.input.beta, geom);
  return out;
}

namespace {

void append_rows(QpProblem& p, const Eigen::MatrixXd& G, const Eigen::VectorXd& h) {
  const auto r0 = p.G.rows();
  p.G.conservativeResize(r0 + G.rows(), Eigen::NoChange);
  p.h.conservativeResize(r0 + h.size());
  p.G.bottomRows(G.rows()) = G;
  p.h.tail(h.size()) = h;
}

}  // namespace

ControllerOutput nominal_step(const EgoState& x, const Eigen::Vector2d& e_meas,
                              const Eigen::Vector2d& e_dot_meas, const ControllerConfig& cfg) {
  const LinearBarrier lb = nominal_barrier(x, e_meas, e_dot_meas, cfg);
  QpProblem p = base_problem(x, cfg);
  Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, p.num_variables());
  row(0, 0) = -lb.L_G(0);
  row(0, 1) = -lb.L_G(1);
  append_rows(p, row, Eigen::VectorXd::Constant(1, lb.a0 + lb.L_G.tail<2>().dot(e_dot_meas)));

  ControllerOutput out = finalize_output(solve_qp(p, cfg.solver), cfg.geom, cfg.bounds);
  out.barrier_margin = lb.margin(out.input);
  return out;
}

ControllerOutput robust_socp_step(const EgoState& x, const Eigen::Vector2d& e_meas,
                                  const Eigen::Vector2d& e_dot_meas,
                                  const ErrorBounds& raw_bounds, const LipschitzSet& lip,
                                  const ControllerConfig& cfg) {
  const ConeBarrier cb = robust_socp_barrier(x, e_meas, e_dot_meas, raw_bounds, lip, cfg);
  SocpProblem p;
  p.qp = base_problem(x, cfg);
  const int n = p.qp.num_variables();
  p.cone.F = Eigen::MatrixXd::Zero(4, n);
  p.cone.F(0, 0) = cb.weights(0);
  p.cone.F(1, 1) = cb.weights(1);
  p.cone.g = Eigen::VectorXd::Zero(4);
  p.cone.g(2) = cb.weights(2) * e_dot_meas(0);
  p.cone.g(3) = cb.weights(3) * e_dot_meas(1);
  p.cone.f = Eigen::VectorXd::Zero(n);
  p.cone.f(0) = cb.L_G(0);
  p.cone.f(1) = cb.L_G(1);
  p.cone.d = cb.a0 + cb.L_G.tail<2>().dot(e_dot_meas);

  ControllerOutput out = finalize_output(solve_socp(p, cfg.solver), cfg.geom, cfg.bounds);
  out.barrier_margin = cb.margin(out.input);
  return out;
}

ControllerOutput proposed_step(const EgoState& x, const Eigen::Vector2d& e_hat,
                               const Eigen::Vector2d& e_dot_hat, const ErrorBounds& bounds,
                               const LipschitzSet& lip, const ControllerConfig& cfg) {
  const MinSumBarrier mb = proposed_barrier(x, e_hat, e_dot_hat, bounds, lip, cfg);
  const HypographBlock hb = hypograph_reformulate(
      mb.a0, mb.b_minus, mb.b_plus, {std::nullopt, std::nullopt, e_dot_hat(0), e_dot_hat(1)});

  QpProblem p = base_problem(x, cfg, hb.num_aux);
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(hb.G.rows(), p.num_variables());
  for (int j = 0; j < hb.num_decision; ++j) rows.col(hb.decision_index[j]) = hb.G.col(j);
  for (int k = 0; k < hb.num_aux; ++k) {
    rows.col(kBaseVariables + k) = hb.G.col(hb.num_decision + k);
  }
  append_rows(p, rows, hb.h);

  ControllerOutput out = finalize_output(solve_qp(p, cfg.solver), cfg.geom, cfg.bounds);
  out.barrier_margin = mb.margin(out.input);
  out.sign_condition_ok = mb.sign_condition_ok();
  return out;
}

ControllerOutput controller_step(const EgoState& x, const Eigen::Vector2d& e,
                                 const Eigen::Vector2d& e_dot, const RobustConfig& robust,
                                 const ControllerConfig& cfg) {
  switch (robust.mode) {
    case ControllerMode::nominal:
      return nominal_step(x, e, e_dot, cfg);
    case ControllerMode::robust_socp:
      return robust_socp_step(x, e, e_dot, robust.eps, robust.lipschitz, cfg);
    case ControllerMode::proposed:
      return proposed_step(x, e, e_dot, robust.eps, robust.lipschitz, cfg);
  }
  throw std::logic_error("controller_step: unknown mode");
}

}  // namespace ecbf
