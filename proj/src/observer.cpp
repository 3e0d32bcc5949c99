#include "ecbf/observer.hpp"

#include <cmath>
#include <functional>

#include "ecbf/lmi_solver.hpp"

namespace ecbf {

Eigen::MatrixXd MeasurementModel::output_matrix() const {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(kOutputs, 4);
  C(0, kX) = 1.0;
  C(1, kY) = 1.0;
  C(2, kV) = 1.0;
  return C;
}

Eigen::MatrixXd MeasurementModel::noise_matrix() const {
  return Eigen::Vector3d(noise_gain_position, noise_gain_position, noise_gain_speed)
      .asDiagonal();
}

std::vector<GridPoint> GridSpec::points() const {
  std::vector<GridPoint> out;
  for (double vv : v)
    for (double pp : psi)
      for (double dd : delta_f) out.push_back({vv, pp, dd});
  return out;
}

Eigen::Matrix4d obstacle_jacobian(const Eigen::Vector4d& x, const ObstacleInput& u,
                                  const VehicleGeometry& geom) {
  const double beta = steer_to_slip(u.delta_f, geom);
  const double course = x(kPsi) + beta;
  const double v = x(kV);
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  A(kX, kPsi) = -v * std::sin(course);
  A(kX, kV) = std::cos(course);
  A(kY, kPsi) = v * std::cos(course);
  A(kY, kV) = std::sin(course);
  A(kPsi, kV) = std::sin(beta) / geom.l_r;
  return A;
}

ObserverModel build_observer_model(const std::vector<GridPoint>& grid,
                                   const MeasurementModel& measurement,
                                   const VehicleGeometry& geom) {
  ObserverModel model;
  for (const GridPoint& g : grid) {
    model.A_grid.push_back(obstacle_jacobian({0.0, 0.0, g.psi, g.v}, {0.0, g.delta_f}, geom));
  }
  model.C = measurement.output_matrix();
  model.D = measurement.noise_matrix();
  return model;
}

namespace {

struct Unknowns {
  Eigen::MatrixXd P;
  Eigen::MatrixXd R;
  double gamma = 0.0;
};

// Decision vector layout: upper triangle of P (row-major), R (row-major), gamma.
class SynthesisLayout {
 public:
  SynthesisLayout(int nx, int ny) : nx_(nx), ny_(ny) {}

  int size() const { return nx_ * (nx_ + 1) / 2 + ny_ * nx_ + 1; }

  Unknowns unpack(const Eigen::VectorXd& y) const {
    Unknowns u{Eigen::MatrixXd::Zero(nx_, nx_), Eigen::MatrixXd::Zero(ny_, nx_), 0.0};
    int k = 0;
    for (int i = 0; i < nx_; ++i) {
      for (int j = i; j < nx_; ++j) {
        u.P(i, j) = y(k);
        u.P(j, i) = y(k);
        ++k;
      }
    }
    for (int i = 0; i < ny_; ++i)
      for (int j = 0; j < nx_; ++j) u.R(i, j) = y(k++);
    u.gamma = y(k);
    return u;
  }

 private:
  int nx_;
  int ny_;
};

// Every synthesis LMI written as a matrix that must be positive semidefinite.
Eigen::MatrixXd lower_bound_block(const Unknowns& u) {
  return u.P - Eigen::MatrixXd::Identity(u.P.rows(), u.P.cols());
}

Eigen::MatrixXd gain_bound_block(const Unknowns& u) {
  const int nx = static_cast<int>(u.P.rows());
  const int ny = static_cast<int>(u.R.rows());
  Eigen::MatrixXd M(nx + ny, nx + ny);
  M << u.P, u.R.transpose(), u.R, u.gamma * Eigen::MatrixXd::Identity(ny, ny);
  return M;
}

Eigen::MatrixXd coupling(const Unknowns& u, const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
  return A.transpose() * u.P + u.P * A - C.transpose() * u.R - u.R.transpose() * C;
}

Eigen::MatrixXd decay_block(const Unknowns& u, const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                            double theta) {
  return -(coupling(u, A, C) + 2.0 * theta * u.P);
}

Eigen::MatrixXd attenuation_block(const Unknowns& u, const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                                  double lambda) {
  const int nx = static_cast<int>(u.P.rows());
  const int nw = static_cast<int>(D.cols());
  const Eigen::MatrixXd RtD = u.R.transpose() * D;
  Eigen::MatrixXd M(nx + nw, nx + nw);
  M << coupling(u, A, C) + Eigen::MatrixXd::Identity(nx, nx), -RtD, -RtD.transpose(),
      -lambda * lambda * Eigen::MatrixXd::Identity(nw, nw);
  return -M;
}

LmiBlock affine_block(const SynthesisLayout& layout,
                      const std::function<Eigen::MatrixXd(const Unknowns&)>& map) {
  const int m = layout.size();
  LmiBlock blk;
  blk.F0 = map(layout.unpack(Eigen::VectorXd::Zero(m)));
  for (int i = 0; i < m; ++i) {
    blk.F.push_back(map(layout.unpack(Eigen::VectorXd::Unit(m, i))) - blk.F0);
  }
  return blk;
}

double extreme_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

ObserverGains synthesize_gains(const ObserverModel& model, double theta, double lambda) {
  if (model.A_grid.empty()) throw std::invalid_argument("synthesize_gains: empty grid");
  if (theta < 0.0) throw std::invalid_argument("synthesize_gains: theta must be >= 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("synthesize_gains: lambda must be > 0");
  const int nx = static_cast<int>(model.A_grid.front().rows());
  const int ny = static_cast<int>(model.C.rows());
  if (model.C.cols() != nx || model.D.rows() != ny) {
    throw std::invalid_argument("synthesize_gains: C/D dimensions inconsistent");
  }

  const SynthesisLayout layout(nx, ny);
  LmiProblem problem;
  problem.c = Eigen::VectorXd::Unit(layout.size(), layout.size() - 1);
  problem.blocks.push_back(affine_block(layout, lower_bound_block));
  problem.blocks.push_back(affine_block(layout, gain_bound_block));
  for (const Eigen::MatrixXd& A : model.A_grid) {
    problem.blocks.push_back(
        affine_block(layout, [&](const Unknowns& u) { return decay_block(u, A, model.C, theta); }));
    problem.blocks.push_back(affine_block(layout, [&](const Unknowns& u) {
      return attenuation_block(u, A, model.C, model.D, lambda);
    }));
  }

  const LmiSolution sol = solve_lmi(problem);
  if (sol.status != SolveStatus::optimal) {
    throw InfeasibleSynthesis(std::string("observer synthesis failed (") + to_string(sol.status) +
                              "); relax theta, lambda or the grid");
  }
  const Unknowns u = layout.unpack(sol.y);
  ObserverGains gains;
  gains.P = u.P;
  gains.R = u.R;
  gains.L = u.P.ldlt().solve(u.R.transpose());
  gains.theta = theta;
  gains.lambda = lambda;
  gains.gamma_obj = u.gamma;
  return gains;
}

ObserverGains synthesize_gains(const std::vector<GridPoint>& grid,
                               const MeasurementModel& measurement, double theta, double lambda,
                               const VehicleGeometry& geom) {
  return synthesize_gains(build_observer_model(grid, measurement, geom), theta, lambda);
}

LmiCheckResult lmi_check(const ObserverGains& gains, const ObserverModel& model, double tol) {
  const auto nx = gains.P.rows();
  const auto ny = model.C.rows();
  if (gains.P.cols() != nx || gains.R.rows() != ny || gains.R.cols() != nx ||
      model.C.cols() != nx || model.D.rows() != ny) {
    throw std::invalid_argument("lmi_check: dimension mismatch");
  }
  for (const auto& A : model.A_grid) {
    if (A.rows() != nx || A.cols() != nx) throw std::invalid_argument("lmi_check: grid dimension");
  }

  const Unknowns u{gains.P, gains.R, gains.gamma_obj};
  LmiCheckResult res;
  res.ok = true;
  // Each block must be PSD; violation = -min eigenvalue.
  auto consider = [&](const Eigen::MatrixXd& block, const std::string& name) {
    const double violation = -extreme_eigenvalue(block);
    if (res.worst_constraint.empty() || violation > res.worst_violation) {
      res.worst_violation = violation;
      res.worst_constraint = name;
    }
    if (violation > tol) res.ok = false;
  };
  consider(lower_bound_block(u), "P - I >= 0");
  consider(gain_bound_block(u), "[P R'; R gamma I] >= 0");
  for (std::size_t k = 0; k < model.A_grid.size(); ++k) {
    consider(decay_block(u, model.A_grid[k], model.C, gains.theta),
             "decay LMI at grid point " + std::to_string(k));
    consider(attenuation_block(u, model.A_grid[k], model.C, model.D, gains.lambda),
             "attenuation LMI at grid point " + std::to_string(k));
  }
  return res;
}

ObserverState initialize_observer(const Eigen::Vector3d& y, double heading_guess,
                                  const ObserverGains& gains, const MeasurementModel& measurement) {
  ObserverState obs;
  obs.x_hat << y(0), y(1), heading_guess, y(2);
  obs.err_radius = gains.lambda * measurement.w_eff();
  return obs;
}

ObserverState observer_step(const ObserverState& obs, const Eigen::Vector3d& y,
                            const ObstacleInput& u_s, const ObserverGains& gains,
                            const MeasurementModel& measurement, const VehicleGeometry& geom,
                            double dt) {
  const Eigen::MatrixXd C = measurement.output_matrix();
  // The output injection is sampled with y and held over the step. Re-evaluating C xhat at
  // the RK4 stages against a held y lags a moving target by about v dt / 2.
  const Eigen::Vector4d injection = gains.L * (y - C * obs.x_hat);
  auto rhs = [&](const Eigen::Vector4d& xh, const ObstacleInput& u) -> Eigen::Vector4d {
    return nonlinear_derivative(xh, u, geom) + injection;
  };
  ObserverState next;
  next.x_hat = integrate_step(rhs, obs.x_hat, u_s, dt);
  next.err_radius = gains.lambda * measurement.w_eff();
  return next;
}

double velocity_map_lipschitz(const OperatingRegion& region) {
  // Frobenius bound on the Jacobian [-v sin, cos; v cos, sin] over v in [0, v_max].
  return std::sqrt(region.v_max * region.v_max + 1.0);
}

ErrorBounds error_bounds(const ObserverState& obs, const OperatingRegion& region) {
  // c_e is an orthogonal projection onto the position components, so its constant is 1.
  return {obs.err_radius, velocity_map_lipschitz(region) * obs.err_radius};
}

EnvironmentEstimate estimate_environment(const ObserverState& obs, const ObstacleInput& u_s,
                                         const VehicleGeometry& geom) {
  const Eigen::Vector4d drift = nonlinear_derivative(obs.x_hat, u_s, geom);
  return {obs.x_hat.head<2>(), drift.head<2>()};
}

}  // namespace ecbf
