#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ecbf/conic_solvers.hpp"

namespace ecbf {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::max_iterations:
      return "max_iterations";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Constraints in the form N^T x >= b (one column of N per constraint).
struct InequalitySet {
  Eigen::MatrixXd N;
  Eigen::VectorXd b;
};

InequalitySet collect_constraints(const QpProblem& p) {
  const int n = p.num_variables();
  std::vector<std::pair<Eigen::VectorXd, double>> rows;
  for (int i = 0; i < p.G.rows(); ++i) {
    rows.emplace_back(-p.G.row(i).transpose(), -p.h(i));
  }
  for (int j = 0; j < p.lower.size(); ++j) {
    if (std::isfinite(p.lower(j))) {
      rows.emplace_back(Eigen::VectorXd::Unit(n, j), p.lower(j));
    }
  }
  for (int j = 0; j < p.upper.size(); ++j) {
    if (std::isfinite(p.upper(j))) {
      rows.emplace_back(-Eigen::VectorXd::Unit(n, j), -p.upper(j));
    }
  }
  InequalitySet set{Eigen::MatrixXd(n, rows.size()), Eigen::VectorXd(rows.size())};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    set.N.col(k) = rows[k].first;
    set.b(k) = rows[k].second;
  }
  return set;
}

void validate(const QpProblem& p) {
  const int n = p.num_variables();
  if (p.Q.rows() != n || p.Q.cols() != n) throw std::invalid_argument("solve_qp: Q/q size mismatch");
  if (p.G.rows() != p.h.size() || (p.G.rows() > 0 && p.G.cols() != n)) {
    throw std::invalid_argument("solve_qp: G/h size mismatch");
  }
  if ((p.lower.size() != 0 && p.lower.size() != n) || (p.upper.size() != 0 && p.upper.size() != n)) {
    throw std::invalid_argument("solve_qp: bound size mismatch");
  }
}

// Goldfarb-Idnani working set. J holds L^{-T} rotated by the active normals, R is the
// upper-triangular factor of the active normals in the J basis.
class DualActiveSet {
 public:
  DualActiveSet(const Eigen::MatrixXd& J0, int max_active)
      : J_(J0), R_(Eigen::MatrixXd::Zero(J0.rows(), J0.rows())) {
    active_.reserve(max_active);
    u_.reserve(max_active + 1);
  }

  int size() const { return static_cast<int>(active_.size()); }
  const std::vector<int>& active() const { return active_; }
  std::vector<double>& multipliers() { return u_; }

  // d = J' n, z = J2 d2, r = R^{-1} d1.
  void directions(const Eigen::VectorXd& normal, Eigen::VectorXd& d, Eigen::VectorXd& z,
                  Eigen::VectorXd& r) const {
    const int n = static_cast<int>(J_.rows());
    const int q = size();
    d = J_.transpose() * normal;
    z = J_.rightCols(n - q) * d.tail(n - q);
    r.resize(q);
    for (int i = q - 1; i >= 0; --i) {
      double sum = d(i);
      for (int j = i + 1; j < q; ++j) sum -= R_(i, j) * r(j);
      r(i) = sum / R_(i, i);
    }
  }

  // Appends `constraint`; u_ must already carry its multiplier in the last slot.
  bool add(int constraint, Eigen::VectorXd d) {
    const int n = static_cast<int>(J_.rows());
    const int q = size();
    for (int j = n - 1; j > q; --j) {
      double cc = d(j - 1);
      double ss = d(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d(j - 1) = -h;
      } else {
        d(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = 0; k < n; ++k) {
        const double t1 = J_(k, j - 1);
        const double t2 = J_(k, j);
        J_(k, j - 1) = t1 * cc + t2 * ss;
        J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
      }
    }
    R_.col(q).head(q + 1) = d.head(q + 1);
    active_.push_back(constraint);
    r_norm_ = std::max(r_norm_, std::abs(d(q)));
    return std::abs(d(q)) > kEps * r_norm_;
  }

  // Removes the active constraint `constraint`; the pending multiplier (if any) in u_ shifts
  // down with the others.
  void remove(int constraint) {
    const int n = static_cast<int>(J_.rows());
    int pos = -1;
    for (int k = 0; k < size(); ++k) {
      if (active_[k] == constraint) pos = k;
    }
    if (pos < 0) throw std::logic_error("solve_qp: dropping inactive constraint");
    const int q_old = size();
    for (int j = pos; j < q_old - 1; ++j) R_.col(j) = R_.col(j + 1);
    R_.col(q_old - 1).setZero();
    active_.erase(active_.begin() + pos);
    u_.erase(u_.begin() + pos);
    const int q = size();
    for (int j = pos; j < q; ++j) {
      double cc = R_(j, j);
      double ss = R_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R_(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < q; ++k) {
        const double t1 = R_(j, k);
        const double t2 = R_(j + 1, k);
        R_(j, k) = t1 * cc + t2 * ss;
        R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
      }
      for (int k = 0; k < n; ++k) {
        const double t1 = J_(k, j);
        const double t2 = J_(k, j + 1);
        J_(k, j) = t1 * cc + t2 * ss;
        J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
      }
    }
  }

 private:
  Eigen::MatrixXd J_;
  Eigen::MatrixXd R_;
  std::vector<int> active_;
  std::vector<double> u_;
  double r_norm_ = 1.0;
};

}  // namespace

Solution solve_qp(const QpProblem& problem, const SolverOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  validate(problem);
  const int n = problem.num_variables();
  const InequalitySet cons = collect_constraints(problem);
  const int m = static_cast<int>(cons.b.size());

  // Internal form: 1/2 x'Gx + g0'x with G = 2Q.
  const Eigen::MatrixXd G = 2.0 * problem.Q;
  const Eigen::VectorXd& g0 = problem.q;
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("solve_qp: Q must be positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd J0 =
      L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n)).transpose();

  Eigen::VectorXd x = -llt.solve(g0);
  DualActiveSet ws(J0, m);
  std::vector<double>& u = ws.multipliers();
  std::vector<bool> excluded(m, false);

  Solution sol;
  sol.status = SolveStatus::optimal;
  Eigen::VectorXd d, z, r;
  int iterations = 0;

  auto slack = [&](int i) { return cons.N.col(i).dot(x) - cons.b(i); };
  auto violation_tol = [&](int i) {
    return 1e-12 * std::max(1.0, cons.N.col(i).norm() * x.norm() + std::abs(cons.b(i)));
  };

  while (true) {
    // Step 1: most violated constraint.
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      if (excluded[i]) continue;
      bool is_active = false;
      for (int a : ws.active()) is_active = is_active || a == i;
      if (is_active) continue;
      const double s = slack(i);
      if (s < -violation_tol(i) && s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) break;

    const Eigen::VectorXd normal = cons.N.col(p);
    u.push_back(0.0);
    bool added = false;
    while (!added) {
      if (++iterations > options.max_iterations) {
        sol.status = SolveStatus::max_iterations;
        break;
      }
      ws.directions(normal, d, z, r);
      const int q = ws.size();

      // Step 2b: partial (dual) and full (primal) step lengths.
      double t1 = kInf;
      int drop = -1;
      for (int k = 0; k < q; ++k) {
        if (r(k) > 0.0 && u[k] / r(k) < t1) {
          t1 = u[k] / r(k);
          drop = ws.active()[k];
        }
      }
      double t2 = kInf;
      if (z.squaredNorm() > kEps) {
        t2 = -slack(p) / z.dot(normal);
        if (t2 < 0.0) t2 = kInf;
      }
      const double t = std::min(t1, t2);
      if (!(t < kInf)) {
        sol.status = SolveStatus::infeasible;
        break;
      }
      if (!(t2 < kInf)) {
        for (int k = 0; k < q; ++k) u[k] -= t * r(k);
        u[q] += t;
        ws.remove(drop);
        continue;
      }
      x += t * z;
      for (int k = 0; k < q; ++k) u[k] -= t * r(k);
      u[q] += t;
      if (t == t2) {
        if (!ws.add(p, d)) {
          // Numerically dependent normal: discard it and move on.
          excluded[p] = true;
          ws.remove(p);
        }
        added = true;
      } else {
        ws.remove(drop);
      }
    }
    if (sol.status != SolveStatus::optimal) break;
  }

  double primal = 0.0;
  for (int i = 0; i < m; ++i) primal = std::max(primal, -slack(i));
  if (sol.status == SolveStatus::optimal && primal > options.primal_tol) {
    sol.status = SolveStatus::infeasible;
  }
  Eigen::VectorXd stationarity = G * x + g0;
  for (int k = 0; k < ws.size(); ++k) stationarity -= u[k] * cons.N.col(ws.active()[k]);

  sol.x_star = x;
  sol.objective = x.dot(problem.Q * x) + problem.q.dot(x);
  sol.iterations = iterations;
  sol.primal_residual = primal;
  sol.stationarity_residual = stationarity.lpNorm<Eigen::Infinity>();
  sol.solve_time_us =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t_start).count();
  return sol;
}

}  // namespace ecbf
