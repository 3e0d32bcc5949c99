#include "ecbf/lmi_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecbf {

Eigen::MatrixXd LmiBlock::evaluate(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd out = F0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (y(i) != 0.0) out += y(i) * F[i];
  }
  return out;
}

namespace {

double min_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Barrier over the blocks, with an optional shift variable s appended to y so that each
// block reads F(y) + s I.
class LogDetBarrier {
 public:
  LogDetBarrier(const LmiProblem& problem, bool with_shift)
      : problem_(problem), with_shift_(with_shift) {}

  int dim() const { return static_cast<int>(problem_.c.size()) + (with_shift_ ? 1 : 0); }

  double degree() const {
    double d = 0.0;
    for (const auto& b : problem_.blocks) d += static_cast<double>(b.F0.rows());
    return d;
  }

  Eigen::MatrixXd block_value(std::size_t k, const Eigen::VectorXd& y) const {
    const int m = static_cast<int>(problem_.c.size());
    Eigen::MatrixXd M = problem_.blocks[k].evaluate(y.head(m));
    if (with_shift_) M.diagonal().array() += y(m);
    return M;
  }

  bool value(const Eigen::VectorXd& y, double& out) const {
    out = 0.0;
    for (std::size_t k = 0; k < problem_.blocks.size(); ++k) {
      Eigen::LLT<Eigen::MatrixXd> llt(block_value(k, y));
      if (llt.info() != Eigen::Success) return false;
      const Eigen::MatrixXd L = llt.matrixL();
      if ((L.diagonal().array() <= 0.0).any()) return false;
      out -= 2.0 * L.diagonal().array().log().sum();
    }
    return true;
  }

  // Gradient and Hessian of -sum log det. Uses W_i = L^{-1} F_i L^{-T}:
  //   g_i = -tr(W_i),  H_ij = <W_i, W_j>.
  void derivatives(const Eigen::VectorXd& y, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const int n = dim();
    const int m = static_cast<int>(problem_.c.size());
    grad = Eigen::VectorXd::Zero(n);
    hess = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::MatrixXd> W(n);
    for (std::size_t k = 0; k < problem_.blocks.size(); ++k) {
      const LmiBlock& blk = problem_.blocks[k];
      Eigen::LLT<Eigen::MatrixXd> llt(block_value(k, y));
      const Eigen::MatrixXd L = llt.matrixL();
      const int dimk = static_cast<int>(blk.F0.rows());
      auto whiten = [&](const Eigen::MatrixXd& F) {
        Eigen::MatrixXd tmp = L.triangularView<Eigen::Lower>().solve(F);
        return Eigen::MatrixXd(
            L.triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose());
      };
      std::vector<int> used;
      for (int i = 0; i < m; ++i) {
        if (blk.F[i].isZero(0.0)) continue;
        W[i] = whiten(blk.F[i]);
        used.push_back(i);
      }
      if (with_shift_) {
        W[m] = whiten(Eigen::MatrixXd::Identity(dimk, dimk));
        used.push_back(m);
      }
      for (std::size_t a = 0; a < used.size(); ++a) {
        const int i = used[a];
        grad(i) -= W[i].trace();
        for (std::size_t b = a; b < used.size(); ++b) {
          const int j = used[b];
          const double v = (W[i].array() * W[j].array()).sum();
          hess(i, j) += v;
          if (i != j) hess(j, i) += v;
        }
      }
    }
  }

 private:
  const LmiProblem& problem_;
  bool with_shift_;
};

struct Centering {
  bool ok = true;
};

// Newton centering for t * (c'y + reg |y - anchor|^2) + barrier. `max_steps` bounds this
// call; `steps` accumulates across calls for reporting.
Centering center(const LogDetBarrier& barrier, const Eigen::VectorXd& c, double reg,
                 const Eigen::VectorXd& anchor, double t, Eigen::VectorXd& y, int& steps,
                 int max_steps) {
  int local = 0;
  auto merit = [&](const Eigen::VectorXd& z, double& out) {
    double phi = 0.0;
    if (!barrier.value(z, phi)) return false;
    out = t * (c.dot(z) + reg * (z - anchor).squaredNorm()) + phi;
    return true;
  };
  for (;;) {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    barrier.derivatives(y, grad, hess);
    grad += t * (c + 2.0 * reg * (y - anchor));
    hess.diagonal().array() += 2.0 * t * reg + 1e-13 * (1.0 + hess.diagonal().maxCoeff());
    const Eigen::VectorXd step = -hess.ldlt().solve(grad);
    const double decrement = -grad.dot(step);
    if (decrement / 2.0 <= 1e-10) return {};
    if (++local > max_steps) return {false};
    ++steps;
    double f0 = 0.0;
    merit(y, f0);
    double alpha = 1.0;
    double f1 = 0.0;
    while (!merit(y + alpha * step, f1) || f1 > f0 - 0.25 * alpha * decrement) {
      alpha *= 0.5;
      if (alpha < 1e-14) return {};
    }
    y += alpha * step;
    // Remaining progress is below the resolution of the merit value.
    if (f0 - f1 <= 1e-13 * std::max(1.0, std::abs(f0))) return {};
  }
}

}  // namespace

LmiSolution solve_lmi(const LmiProblem& problem, const LmiOptions& options) {
  const int m = static_cast<int>(problem.c.size());
  for (const auto& b : problem.blocks) {
    if (static_cast<int>(b.F.size()) != m) throw std::invalid_argument("solve_lmi: block arity");
    for (const auto& Fi : b.F) {
      if (Fi.rows() != b.F0.rows() || Fi.cols() != b.F0.cols()) {
        throw std::invalid_argument("solve_lmi: block dimension mismatch");
      }
    }
  }

  LmiSolution sol;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  auto smallest = [&](const Eigen::VectorXd& z) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& b : problem.blocks) lo = std::min(lo, min_eigenvalue(b.evaluate(z)));
    return lo;
  };
  auto finish = [&](SolveStatus status) {
    sol.status = status;
    sol.y = y;
    sol.objective = problem.c.dot(y);
    sol.min_eigenvalue = smallest(y);
    return sol;
  };

  // Phase I: minimize s with F(y) + s I >= 0, lightly anchored at the origin so that
  // directions no block sees stay bounded.
  if (!(smallest(y) > 0.0)) {
    LogDetBarrier shifted(problem, true);
    Eigen::VectorXd z(m + 1);
    z << y, 1.0 - smallest(y);
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(m + 1);
    c1(m) = 1.0;
    const Eigen::VectorXd anchor = Eigen::VectorXd::Zero(m + 1);
    double t = 1.0;
    for (;;) {
      if (!center(shifted, c1, 1e-9, anchor, t, z, sol.iterations, options.max_newton_steps).ok) {
        y = z.head(m);
        return finish(SolveStatus::max_iterations);
      }
      if (z(m) < 0.0) break;
      if (shifted.degree() / t < options.gap_tol) {
        y = z.head(m);
        return finish(SolveStatus::infeasible);
      }
      t *= options.barrier_growth;
    }
    y = z.head(m);
  }

  LogDetBarrier barrier(problem, false);
  const Eigen::VectorXd no_anchor = Eigen::VectorXd::Zero(m);
  double t = 1.0;
  for (;;) {
    if (!center(barrier, problem.c, 0.0, no_anchor, t, y, sol.iterations, options.max_newton_steps).ok) {
      return finish(SolveStatus::max_iterations);
    }
    if (barrier.degree() / t < options.gap_tol) break;
    t *= options.barrier_growth;
  }
  return finish(SolveStatus::optimal);
}

}  // namespace ecbf
