#include <chrono>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ecbf/conic_solvers.hpp"

namespace ecbf {
namespace {

constexpr double kGapTol = 1e-10;
constexpr double kBarrierGrowth = 20.0;
constexpr double kNewtonTol = 1e-12;
// Pull toward the unconstrained minimizer during phase I; keeps directions no constraint
// bounds from drifting.
constexpr double kPhaseOneAnchor = 1e-6;

// Affine rows a_i'x <= b_i together with one cone ||F x + g|| <= f'x + d. When
// `with_epigraph` is set, a trailing variable s relaxes every constraint by +s.
struct BarrierSet {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  SecondOrderCone cone;
  bool with_epigraph = false;

  int dim() const { return static_cast<int>(A.cols()) + (with_epigraph ? 1 : 0); }
  double degree() const { return static_cast<double>(b.size()) + 2.0; }

  // Returns false if y is not strictly inside.
  bool evaluate(const Eigen::VectorXd& y, double* value, Eigen::VectorXd* grad,
                Eigen::MatrixXd* hess) const {
    const int nx = static_cast<int>(A.cols());
    const Eigen::VectorXd x = y.head(nx);
    const double s = with_epigraph ? y(nx) : 0.0;
    const Eigen::VectorXd slack = b - A * x + Eigen::VectorXd::Constant(b.size(), s);
    if ((slack.array() <= 0.0).any()) return false;
    const Eigen::VectorXd cu = cone.F * x + cone.g;
    const double w = cone.f.dot(x) + cone.d + s;
    if (w <= 0.0) return false;
    const double unorm = cu.norm();
    // (w - |u|)(w + |u|) avoids squaring before the subtraction.
    const double D = (w - unorm) * (w + unorm);
    if (D <= 0.0) return false;
    if (value) *value = -slack.array().log().sum() - std::log(D);
    if (grad || hess) {
      const int ny = dim();
      Eigen::MatrixXd Ay(A.rows(), ny);
      Ay.leftCols(nx) = A;
      if (with_epigraph) Ay.col(nx).setConstant(-1.0);
      Eigen::MatrixXd Fy = Eigen::MatrixXd::Zero(cone.F.rows(), ny);
      Fy.leftCols(nx) = cone.F;
      Eigen::VectorXd fy = Eigen::VectorXd::Zero(ny);
      fy.head(nx) = cone.f;
      if (with_epigraph) fy(nx) = 1.0;
      const Eigen::VectorXd inv = slack.cwiseInverse();
      const Eigen::VectorXd dD = 2.0 * w * fy - 2.0 * Fy.transpose() * cu;
      if (grad) *grad = Ay.transpose() * inv - dD / D;
      if (hess) {
        *hess = Ay.transpose() * inv.cwiseAbs2().asDiagonal() * Ay;
        // Cone Hessian in (u, w) coordinates; the ww entry is written without the
        // cancellation of -2/D + 4 w^2 / D^2.
        const int m = static_cast<int>(cu.size());
        Eigen::MatrixXd Huw(m + 1, m + 1);
        Huw.topLeftCorner(m, m) = (2.0 / D) * Eigen::MatrixXd::Identity(m, m) +
                                  (4.0 / (D * D)) * cu * cu.transpose();
        Huw.topRightCorner(m, 1) = (-4.0 * w / (D * D)) * cu;
        Huw.bottomLeftCorner(1, m) = Huw.topRightCorner(m, 1).transpose();
        Huw(m, m) = 2.0 * (w * w + unorm * unorm) / (D * D);
        Eigen::MatrixXd M(m + 1, ny);
        M.topRows(m) = Fy;
        M.row(m) = fy.transpose();
        *hess += M.transpose() * Huw * M;
      }
    }
    return true;
  }
};

struct CenteringResult {
  bool ok = true;
  double residual = 0.0;
};

// Minimizes t * (y'Qy + c'y) + barrier(y) from a strictly feasible start. `max_iterations`
// bounds this call; `iterations` accumulates across calls. With `stop_when_strict` (phase I)
// it returns as soon as the trailing relaxation variable turns negative.
CenteringResult center(const BarrierSet& set, const Eigen::MatrixXd& Q, const Eigen::VectorXd& c,
                       double t, Eigen::VectorXd& y, int& iterations, int max_iterations,
                       bool stop_when_strict = false) {
  auto merit = [&](const Eigen::VectorXd& z, double& out) {
    double phi = 0.0;
    if (!set.evaluate(z, &phi, nullptr, nullptr)) return false;
    out = t * (z.dot(Q * z) + c.dot(z)) + phi;
    return true;
  };
  CenteringResult res;
  int local = 0;
  for (;;) {
    double phi = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    set.evaluate(y, &phi, &grad, &hess);
    grad += t * (2.0 * Q * y + c);
    hess += 2.0 * t * Q;
    hess.diagonal().array() *= 1.0 + 1e-14;
    res.residual = grad.norm() / t;
    const Eigen::VectorXd step = -hess.ldlt().solve(grad);
    const double decrement = -grad.dot(step);
    if (decrement / 2.0 <= kNewtonTol) return res;
    if (++local > max_iterations) {
      res.ok = false;
      return res;
    }
    ++iterations;
    double f0 = 0.0;
    merit(y, f0);
    double alpha = 1.0;
    double f1 = 0.0;
    while (!merit(y + alpha * step, f1) || f1 > f0 - 0.25 * alpha * decrement) {
      alpha *= 0.5;
      if (alpha < 1e-16) return res;
    }
    y += alpha * step;
    if (stop_when_strict && y(y.size() - 1) < 0.0) return res;
    // Remaining progress is below the resolution of the merit value.
    if (f0 - f1 <= 1e-14 * std::max(1.0, std::abs(f0))) return res;
  }
}

}  // namespace

Solution solve_socp(const SocpProblem& problem, const SolverOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  const QpProblem& qp = problem.qp;
  const SecondOrderCone& cone = problem.cone;
  const int n = qp.num_variables();
  if (cone.F.cols() != n || cone.f.size() != n || cone.g.size() != cone.F.rows()) {
    throw std::invalid_argument("solve_socp: cone dimensions inconsistent");
  }

  if (cone.F.rows() == 0 || cone.F.isZero(0.0)) {
    // Half-space -f'x <= d - ||g||.
    QpProblem reduced = qp;
    reduced.G.conservativeResize(qp.G.rows() + 1, n);
    reduced.h.conservativeResize(qp.h.size() + 1);
    reduced.G.row(qp.G.rows()) = -cone.f.transpose();
    reduced.h(qp.h.size()) = cone.d - cone.g.norm();
    Solution sol = solve_qp(reduced, options);
    sol.solve_time_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t_start)
            .count();
    return sol;
  }

  // Gather affine rows, including finite variable bounds.
  std::vector<std::pair<Eigen::VectorXd, double>> rows;
  for (int i = 0; i < qp.G.rows(); ++i) rows.emplace_back(qp.G.row(i).transpose(), qp.h(i));
  for (int j = 0; j < qp.lower.size(); ++j) {
    if (std::isfinite(qp.lower(j))) rows.emplace_back(-Eigen::VectorXd::Unit(n, j), -qp.lower(j));
  }
  for (int j = 0; j < qp.upper.size(); ++j) {
    if (std::isfinite(qp.upper(j))) rows.emplace_back(Eigen::VectorXd::Unit(n, j), qp.upper(j));
  }
  BarrierSet set;
  set.A.resize(rows.size(), n);
  set.b.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    set.A.row(k) = rows[k].first.transpose();
    set.b(k) = rows[k].second;
  }
  set.cone = cone;

  Solution sol;
  int iterations = 0;
  Eigen::LLT<Eigen::MatrixXd> qllt(qp.Q);
  if (qllt.info() != Eigen::Success) throw std::invalid_argument("solve_socp: Q must be positive definite");
  Eigen::VectorXd x = -0.5 * qllt.solve(qp.q);

  auto finish = [&](SolveStatus status, double residual) {
    sol.status = status;
    sol.x_star = x;
    sol.objective = x.dot(qp.Q * x) + qp.q.dot(x);
    sol.iterations = iterations;
    double primal = 0.0;
    if (set.b.size() > 0) primal = std::max(0.0, (set.A * x - set.b).maxCoeff());
    primal = std::max(primal, (cone.F * x + cone.g).norm() - cone.f.dot(x) - cone.d);
    sol.primal_residual = primal;
    sol.stationarity_residual = residual;
    sol.solve_time_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t_start)
            .count();
    return sol;
  };

  // Phase I: minimize s subject to every constraint relaxed by s.
  if (!set.evaluate(x, nullptr, nullptr, nullptr)) {
    BarrierSet relaxed = set;
    relaxed.with_epigraph = true;
    double s0 = (cone.F * x + cone.g).norm() - cone.f.dot(x) - cone.d;
    if (set.b.size() > 0) s0 = std::max(s0, (set.A * x - set.b).maxCoeff());
    Eigen::VectorXd y(n + 1);
    y << x, s0 + 1.0;
    Eigen::MatrixXd Q1 = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Q1.topLeftCorner(n, n).diagonal().setConstant(kPhaseOneAnchor);
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n + 1);
    c1.head(n) = -2.0 * kPhaseOneAnchor * x;
    c1(n) = 1.0;
    double t = 1.0;
    for (;;) {
      const CenteringResult r =
          center(relaxed, Q1, c1, t, y, iterations, options.max_iterations, true);
      if (!r.ok) return finish(SolveStatus::max_iterations, r.residual);
      if (y(n) < 0.0) break;
      if (relaxed.degree() / t < kGapTol) {
        x = y.head(n);
        return finish(SolveStatus::infeasible, r.residual);
      }
      t *= kBarrierGrowth;
    }
    x = y.head(n);
  }

  // Phase II: barrier continuation on the original objective.
  double scale = 1.0 + std::abs(x.dot(qp.Q * x) + qp.q.dot(x));
  double t = set.degree() / scale;
  CenteringResult r;
  for (;;) {
    r = center(set, qp.Q, qp.q, t, x, iterations, options.max_iterations);
    if (!r.ok) return finish(SolveStatus::max_iterations, r.residual);
    if (set.degree() / t < kGapTol) break;
    t *= kBarrierGrowth;
  }
  return finish(SolveStatus::optimal, r.residual);
}

}  // namespace ecbf
