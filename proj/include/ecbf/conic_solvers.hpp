#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace ecbf {

enum class SolveStatus { optimal, infeasible, max_iterations };

const char* to_string(SolveStatus status);

struct SolverOptions {
  double primal_tol = 1e-8;
  double stationarity_tol = 1e-6;
  int max_iterations = 200;
};

/// minimize x'Qx + q'x  subject to  Gx <= h  and  lower <= x <= upper.
/// `lower`/`upper` may be left empty; infinite entries are ignored.
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int num_variables() const { return static_cast<int>(q.size()); }
};

/// ||F x + g||_2 <= f'x + d
struct SecondOrderCone {
  Eigen::MatrixXd F;
  Eigen::VectorXd g;
  Eigen::VectorXd f;
  double d = 0.0;
};

struct SocpProblem {
  QpProblem qp;
  SecondOrderCone cone;
};

struct Solution {
  Eigen::VectorXd x_star;
  double objective = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  int iterations = 0;
  double solve_time_us = 0.0;
  double primal_residual = 0.0;
  double stationarity_residual = 0.0;
};

/// Dense dual active-set method (Goldfarb-Idnani). Requires Q symmetric positive definite.
/// Inconsistent constraints are reported through `status`, not by throwing.
Solution solve_qp(const QpProblem& problem, const SolverOptions& options = {});

/// Primal log-barrier interior-point method with a phase-I feasibility search.
/// A cone with F == 0 is a half-space and is handed to solve_qp.
Solution solve_socp(const SocpProblem& problem, const SolverOptions& options = {});

/// Linear description of  a0 + sum_i min(b_minus_i * u_i, b_plus_i * u_i) >= 0.
///
/// Indices with a known value are folded into the constant. The remaining (decision)
/// indices keep their order; each one with b_minus != b_plus receives an auxiliary variable
/// t with t <= b_minus * u and t <= b_plus * u. Rows are expressed as G z <= h over
/// z = (decision variables, auxiliaries).
struct HypographBlock {
  int num_decision = 0;
  int num_aux = 0;
  double folded_constant = 0.0;
  std::vector<int> decision_index;  // original index of each decision variable
  std::vector<int> aux_of;          // per decision variable: auxiliary column or -1
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
};

/// Throws std::invalid_argument if b_minus > b_plus for any index or sizes differ.
HypographBlock hypograph_reformulate(double a0, const Eigen::VectorXd& b_minus,
                                     const Eigen::VectorXd& b_plus,
                                     const std::vector<std::optional<double>>& known_terms);

}  // namespace ecbf
