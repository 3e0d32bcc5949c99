#pragma once

// Independent reference computations shared by the unit tests and the acceptance binary.

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "ecbf/barrier.hpp"
#include "ecbf/conic_solvers.hpp"
#include "ecbf/controllers.hpp"
#include "ecbf/observer.hpp"

namespace ecbf::oracle {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(rng_); }
  Eigen::VectorXd vector(int n, double lo, double hi);

  /// Ego state and environment inside the operating region.
  AugmentedState augmented_state(const OperatingRegion& region);

 private:
  std::mt19937_64 rng_;
};

/// Aggregate outcome of a randomized comparison.
struct Tally {
  int instances = 0;
  int failures = 0;
  double worst = 0.0;  // largest observed error (or violation)
  std::string first_failure;

  void record(double error, double tolerance, const std::string& what);
  bool ok() const { return instances > 0 && failures == 0; }
};

/// minimize x'Qx + q'x s.t. Ax <= b by enumerating active sets and solving each KKT system.
/// Exponential in the number of rows; meant for a handful of constraints.
struct KktResult {
  bool feasible = false;
  Eigen::VectorXd x;
  double objective = 0.0;
};
KktResult enumerate_kkt(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q,
                        const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

/// solve_qp against the closed-form Euclidean projection onto one half-space.
Tally qp_halfspace_projection(int instances, std::uint64_t seed, double tol = 1e-8);

/// Hypograph QP of a0 + sum min(b- u, b+ u) >= 0 against enumeration over the sign orthants,
/// compared in objective.
Tally hypograph_vs_enumeration(int instances, std::uint64_t seed, double tol = 1e-6);

/// solve_socp projecting random points onto the unit ball, against p / max(1, |p|).
Tally socp_ball_projection(int instances, std::uint64_t seed, double tol = 1e-6);

/// Outputs of proposed (eps = 0), nominal and baseline (eps_bar = 0) at random states.
Tally reduction_chain(int instances, std::uint64_t seed, double tol = 1e-8);

/// Central-difference checks of every Lie derivative of H and of the CLFs. Relative error
/// |a - b| / max(1, |b|).
Tally lie_derivative_fd(int instances, std::uint64_t seed, double tol = 1e-5);

/// Log-log slope of the RK4 global error on the nonlinear single-track model.
double rk4_observed_order();

/// Difference quotients of every Lipschitz-bounded barrier term in the environment argument,
/// and of the obstacle velocity map in the obstacle state. A failure is a quotient above its
/// bound.
Tally lipschitz_sampling(int pairs, std::uint64_t seed);

/// Default controller settings for randomized controller checks.
ControllerConfig test_controller_config();

}  // namespace ecbf::oracle
