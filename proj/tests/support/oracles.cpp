#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "ecbf/dynamics.hpp"

namespace ecbf::oracle {

Eigen::VectorXd Sampler::vector(int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
  return v;
}

AugmentedState Sampler::augmented_state(const OperatingRegion& region) {
  AugmentedState xi;
  xi.x = {uniform(-50.0, 50.0), uniform(-10.0, 10.0), uniform(-region.psi_max, region.psi_max),
          uniform(0.0, region.v_max)};
  // Uniform in the disk of radius rho_max around the ego.
  const double r = region.rho_max * std::sqrt(uniform(0.0, 1.0));
  const double phi = uniform(-std::numbers::pi, std::numbers::pi);
  xi.e = {xi.x.X + r * std::cos(phi), xi.x.Y + r * std::sin(phi)};
  return xi;
}

void Tally::record(double error, double tolerance, const std::string& what) {
  ++instances;
  worst = std::max(worst, error);
  if (!(error <= tolerance)) {
    if (failures == 0) first_failure = what;
    ++failures;
  }
}

KktResult enumerate_kkt(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q,
                        const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(q.size());
  const int m = static_cast<int>(b.size());
  KktResult best;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    const int k = static_cast<int>(active.size());
    if (k > n) continue;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    K.topLeftCorner(n, n) = 2.0 * Q;
    rhs.head(n) = -q;
    for (int j = 0; j < k; ++j) {
      K.block(0, n + j, n, 1) = A.row(active[j]).transpose();
      K.block(n + j, 0, 1, n) = A.row(active[j]);
      rhs(n + j) = b(active[j]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < n + k) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    if ((A * x - b).maxCoeff() > 1e-9) continue;
    if (k > 0 && sol.tail(k).minCoeff() < -1e-9) continue;
    const double obj = x.dot(Q * x) + q.dot(x);
    if (!best.feasible || obj < best.objective) best = {true, x, obj};
  }
  return best;
}

Tally qp_halfspace_projection(int instances, std::uint64_t seed, double tol) {
  Sampler s(seed);
  Tally t;
  for (int i = 0; i < instances; ++i) {
    const int n = 2 + i % 5;
    const Eigen::VectorXd p = s.vector(n, -5.0, 5.0);
    const Eigen::VectorXd a = s.vector(n, -2.0, 2.0);
    const double b = s.uniform(-3.0, 3.0);
    const Eigen::VectorXd expected = p - std::max(0.0, a.dot(p) - b) / a.squaredNorm() * a;

    QpProblem qp;
    qp.Q = Eigen::MatrixXd::Identity(n, n);
    qp.q = -2.0 * p;
    qp.G = a.transpose();
    qp.h = Eigen::VectorXd::Constant(1, b);
    const Solution sol = solve_qp(qp);
    const double err = sol.status == SolveStatus::optimal
                           ? (sol.x_star - expected).cwiseAbs().maxCoeff()
                           : INFINITY;
    t.record(err, tol, "instance " + std::to_string(i));
  }
  return t;
}

Tally hypograph_vs_enumeration(int instances, std::uint64_t seed, double tol) {
  Sampler s(seed);
  Tally t;
  constexpr int kTerms = 4;
  constexpr int kDecision = 2;  // (a, beta); the rate terms are known
  constexpr double kBox = 3.0;
  constexpr double kAuxWeight = 1e-10;
  for (int i = 0; i < instances; ++i) {
    const double a0 = s.uniform(-3.0, 1.0);
    Eigen::VectorXd b_minus(kTerms), b_plus(kTerms);
    for (int j = 0; j < kTerms; ++j) {
      const double center = s.uniform(-3.0, 3.0);
      const double half = (i + j) % 5 == 0 ? 0.0 : s.uniform(0.0, 1.5);
      b_minus(j) = center - half;
      b_plus(j) = center + half;
    }
    const Eigen::Vector2d known = s.vector(2, -4.0, 4.0);
    const Eigen::Vector2d weights = s.vector(2, 0.5, 5.0);
    const Eigen::Vector2d lin = s.vector(2, -2.0, 2.0);

    // Oracle: on each sign orthant the min terms are linear.
    double folded = a0;
    for (int j = 0; j < 2; ++j) {
      folded += std::min(b_minus(2 + j) * known(j), b_plus(2 + j) * known(j));
    }
    KktResult oracle;
    for (int signs = 0; signs < (1 << kDecision); ++signs) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1 + kDecision + 2 * kDecision, kDecision);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(A.rows());
      b(0) = folded;
      for (int j = 0; j < kDecision; ++j) {
        const bool positive = signs & (1 << j);
        A(0, j) = -(positive ? b_minus(j) : b_plus(j));
        A(1 + j, j) = positive ? -1.0 : 1.0;
        A(1 + kDecision + 2 * j, j) = 1.0;
        A(2 + kDecision + 2 * j, j) = -1.0;
        b(1 + kDecision + 2 * j) = kBox;
        b(2 + kDecision + 2 * j) = kBox;
      }
      const KktResult r = enumerate_kkt(weights.asDiagonal(), lin, A, b);
      if (r.feasible && (!oracle.feasible || r.objective < oracle.objective)) oracle = r;
    }

    // Library: hypograph rows handed to the QP solver.
    const HypographBlock hb = hypograph_reformulate(
        a0, b_minus, b_plus, {std::nullopt, std::nullopt, known(0), known(1)});
    const int nz = hb.num_decision + hb.num_aux;
    QpProblem qp;
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(nz, kAuxWeight);
    diag.head(kDecision) = weights;
    qp.Q = diag.asDiagonal();
    qp.q = Eigen::VectorXd::Zero(nz);
    qp.q.head(kDecision) = lin;
    qp.G = hb.G;
    qp.h = hb.h;
    qp.lower = Eigen::VectorXd::Constant(nz, -INFINITY);
    qp.upper = Eigen::VectorXd::Constant(nz, INFINITY);
    qp.lower.head(kDecision).setConstant(-kBox);
    qp.upper.head(kDecision).setConstant(kBox);
    const Solution sol = solve_qp(qp);

    std::ostringstream what;
    what << "instance " << i;
    const bool lib_ok = sol.status == SolveStatus::optimal;
    if (lib_ok != oracle.feasible) {
      what << ": feasibility disagrees (library " << to_string(sol.status) << ")";
      t.record(INFINITY, tol, what.str());
      continue;
    }
    if (!lib_ok) {
      t.record(0.0, tol, what.str());
      continue;
    }
    const Eigen::VectorXd u = sol.x_star.head(kDecision);
    const double obj = u.dot(weights.asDiagonal() * u) + lin.dot(u);
    t.record(std::abs(obj - oracle.objective), tol, what.str());
  }
  return t;
}

Tally socp_ball_projection(int instances, std::uint64_t seed, double tol) {
  Sampler s(seed);
  Tally t;
  for (int i = 0; i < instances; ++i) {
    const int n = 2 + i % 4;
    const Eigen::VectorXd p = s.vector(n, -3.0, 3.0);
    const Eigen::VectorXd expected = p / std::max(1.0, p.norm());

    SocpProblem sp;
    sp.qp.Q = Eigen::MatrixXd::Identity(n, n);
    sp.qp.q = -2.0 * p;
    sp.qp.G = Eigen::MatrixXd::Zero(0, n);
    sp.qp.h = Eigen::VectorXd::Zero(0);
    sp.cone.F = Eigen::MatrixXd::Identity(n, n);
    sp.cone.g = Eigen::VectorXd::Zero(n);
    sp.cone.f = Eigen::VectorXd::Zero(n);
    sp.cone.d = 1.0;
    const Solution sol = solve_socp(sp);
    const double err = sol.status == SolveStatus::optimal
                           ? (sol.x_star - expected).cwiseAbs().maxCoeff()
                           : INFINITY;
    t.record(err, tol, "instance " + std::to_string(i));
  }
  return t;
}

ControllerConfig test_controller_config() { return ControllerConfig{}; }

Tally reduction_chain(int instances, std::uint64_t seed, double tol) {
  Sampler s(seed);
  Tally t;
  const ControllerConfig cfg = test_controller_config();
  const OperatingRegion region;
  const LipschitzSet lip = lipschitz_bounds(region, cfg.ellipse, cfg.alpha, cfg.geom);
  for (int i = 0; i < instances; ++i) {
    AugmentedState xi = s.augmented_state(region);
    xi.x.v = s.uniform(1.0, region.v_max);
    const Eigen::Vector2d e_dot = s.vector(2, -10.0, 10.0);

    const ControllerOutput nom = nominal_step(xi.x, xi.e, e_dot, cfg);
    const ControllerOutput prop = proposed_step(xi.x, xi.e, e_dot, {0.0, 0.0}, lip, cfg);
    const ControllerOutput base = robust_socp_step(xi.x, xi.e, e_dot, {0.0, 0.0}, lip, cfg);

    std::ostringstream what;
    what << "state " << i;
    if (nom.status != prop.status || nom.status != base.status) {
      what << ": statuses " << to_string(nom.status) << "/" << to_string(prop.status) << "/"
           << to_string(base.status);
      t.record(INFINITY, tol, what.str());
      continue;
    }
    const double err = std::max((nom.input.vec() - prop.input.vec()).cwiseAbs().maxCoeff(),
                                (nom.input.vec() - base.input.vec()).cwiseAbs().maxCoeff());
    t.record(err, tol, what.str());
  }
  return t;
}

namespace {

double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

// Central difference of fn(h) at h = 0.
template <class Fn>
double central(Fn&& fn, double h) {
  return (fn(h) - fn(-h)) / (2.0 * h);
}

}  // namespace

Tally lie_derivative_fd(int instances, std::uint64_t seed, double tol) {
  Sampler s(seed);
  Tally t;
  const ControllerConfig cfg = test_controller_config();
  const OperatingRegion region;
  constexpr double h = 1e-5;
  for (int i = 0; i < instances; ++i) {
    const AugmentedState xi = s.augmented_state(region);
    const Eigen::Vector4d x = xi.x.vec();
    const Eigen::Vector4d f = affine_drift(x);
    const Eigen::Matrix<double, 4, 2> g = affine_input_matrix(x, cfg.geom);
    const BarrierEvaluation be = eval_barrier(xi, cfg.ellipse, cfg.geom);

    auto H_along = [&](const Eigen::Vector4d& dir) {
      return [&, dir](double step) {
        return eval_H({VehicleState::from(x + step * dir), xi.e}, cfg.ellipse);
      };
    };
    auto H_env = [&](int axis) {
      return [&, axis](double step) {
        AugmentedState moved = xi;
        moved.e(axis) += step;
        return eval_H(moved, cfg.ellipse);
      };
    };

    double worst = rel_err(be.L_F_H, central(H_along(f), h));
    for (int j = 0; j < 2; ++j) {
      worst = std::max(worst, rel_err(be.L_G_H(j), central(H_along(g.col(j)), h)));
      worst = std::max(worst, rel_err(be.L_G_H(2 + j), central(H_env(j), h)));
      worst = std::max(worst, rel_err(be.L_Gd_H(j), central(H_env(j), h)));
    }

    const auto clf = clf_constraints(xi.x, cfg.clf, cfg.geom);
    const std::array<std::function<double(const Eigen::Vector4d&)>, 3> V = {
        [&](const Eigen::Vector4d& z) { return std::pow(z(kV) - cfg.clf.v_d, 2); },
        [&](const Eigen::Vector4d& z) { return std::pow(z(kY) - cfg.clf.Y_l, 2); },
        [&](const Eigen::Vector4d& z) { return std::pow(z(kPsi), 2); }};
    for (int c = 0; c < 3; ++c) {
      auto V_along = [&](const Eigen::Vector4d& dir) {
        return [&, dir](double step) { return V[c](x + step * dir); };
      };
      worst = std::max(worst, rel_err(clf[c].V, V[c](x)));
      worst = std::max(worst, rel_err(clf[c].LfV, central(V_along(f), h)));
      for (int j = 0; j < 2; ++j) {
        worst = std::max(worst, rel_err(clf[c].LgV(j), central(V_along(g.col(j)), h)));
      }
    }
    t.record(worst, tol, "state " + std::to_string(i));
  }
  return t;
}

double rk4_observed_order() {
  const VehicleGeometry geom;
  const SteeringInput u{0.5, 0.3};
  const Eigen::Vector4d x0(0.0, 0.0, 0.1, 8.0);
  constexpr double kHorizon = 2.0;
  auto rhs = [&](const Eigen::Vector4d& x, const SteeringInput& in) -> Eigen::Vector4d {
    return nonlinear_derivative(x, in, geom);
  };
  auto solve = [&](int steps) {
    Eigen::Vector4d x = x0;
    const double dt = kHorizon / steps;
    for (int k = 0; k < steps; ++k) x = integrate_step(rhs, x, u, dt);
    return x;
  };
  const Eigen::Vector4d reference = solve(12800);
  // Least-squares slope of log(error) against log(dt) for dt in {0.2, 0.1, 0.05, 0.025}. Finer
  // steps reach round-off and flatten the slope.
  std::vector<double> lx, ly;
  for (int steps : {10, 20, 40, 80}) {
    lx.push_back(std::log(kHorizon / steps));
    ly.push_back(std::log((solve(steps) - reference).norm()));
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Tally lipschitz_sampling(int pairs, std::uint64_t seed) {
  Sampler s(seed);
  Tally t;
  const ControllerConfig cfg = test_controller_config();
  const OperatingRegion region;
  const LipschitzSet lip = lipschitz_bounds(region, cfg.ellipse, cfg.alpha, cfg.geom);
  const double vel_lip = velocity_map_lipschitz(region);
  constexpr double kSlack = 1e-9;

  for (int i = 0; i < pairs; ++i) {
    AugmentedState a = s.augmented_state(region);
    AugmentedState b = a;
    if (i % 2 == 0) {
      b.e += s.vector(2, -1e-3, 1e-3);  // local pairs probe the supremum of the gradient
    } else {
      b = s.augmented_state(region);
      b.x = a.x;
    }
    if ((b.e - a.x.vec().head<2>()).norm() > region.rho_max) b.e = a.e;
    const double de = (a.e - b.e).norm();

    double worst = 0.0;
    if (de > 0.0) {
      const BarrierEvaluation ea = eval_barrier(a, cfg.ellipse, cfg.geom);
      const BarrierEvaluation eb = eval_barrier(b, cfg.ellipse, cfg.geom);
      auto excess = [&](double diff, double bound) { return std::abs(diff) / de - bound; };
      worst = std::max(worst, excess(ea.L_F_H - eb.L_F_H, lip.L_LF));
      worst = std::max(worst, excess(ea.L_Gd_H.norm() - eb.L_Gd_H.norm(), lip.L_Gd));
      worst = std::max(worst, excess(cfg.alpha(ea.H) - cfg.alpha(eb.H), lip.L_aH));
      for (int j = 0; j < 4; ++j) {
        worst = std::max(worst, excess(ea.L_G_H(j) - eb.L_G_H(j), lip.L_G(j)));
      }
    }

    // Obstacle velocity map (v cos(psi + beta), v sin(psi + beta)) in the obstacle state.
    const ObstacleInput us{0.0, s.uniform(-0.1, 0.1)};
    const Eigen::Vector4d xa(s.uniform(-50, 50), s.uniform(-10, 10),
                             s.uniform(-region.psi_max, region.psi_max),
                             s.uniform(0.0, region.v_max));
    Eigen::Vector4d xb(s.uniform(-50, 50), s.uniform(-10, 10),
                       s.uniform(-region.psi_max, region.psi_max), s.uniform(0.0, region.v_max));
    if (i % 2 == 0) {
      xb = xa + s.vector(4, -1e-3, 1e-3);
      xb(kPsi) = std::clamp(xb(kPsi), -region.psi_max, region.psi_max);
      xb(kV) = std::clamp(xb(kV), 0.0, region.v_max);
    }
    const double dx = (xa - xb).norm();
    if (dx > 0.0) {
      const Eigen::Vector2d ca = nonlinear_derivative(xa, us, cfg.geom).head<2>();
      const Eigen::Vector2d cb = nonlinear_derivative(xb, us, cfg.geom).head<2>();
      worst = std::max(worst, (ca - cb).norm() / dx - vel_lip);
    }
    t.record(worst, kSlack, "pair " + std::to_string(i));
  }
  return t;
}

}  // namespace ecbf::oracle
