#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ecbf/conic_solvers.hpp"

namespace ecbf {

/// One linear matrix inequality  F0 + sum_i y_i F_i  >= 0  (positive semidefinite).
struct LmiBlock {
  Eigen::MatrixXd F0;
  std::vector<Eigen::MatrixXd> F;

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const;
};

/// minimize c'y subject to every block being positive semidefinite.
struct LmiProblem {
  Eigen::VectorXd c;
  std::vector<LmiBlock> blocks;
};

struct LmiOptions {
  double gap_tol = 1e-8;
  double barrier_growth = 10.0;
  int max_newton_steps = 400;
};

struct LmiSolution {
  Eigen::VectorXd y;
  double objective = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  int iterations = 0;
  double min_eigenvalue = 0.0;  // smallest eigenvalue over all blocks at y
};

/// Log-det barrier method with a phase-I search for a strictly feasible point. Returns a
/// strictly feasible point whose objective is within `gap_tol` of the optimum, or
/// `infeasible` when no strictly feasible point exists.
LmiSolution solve_lmi(const LmiProblem& problem, const LmiOptions& options = {});

}  // namespace ecbf
