#include <cmath>
#include <limits>
#include <optional>

#include <gtest/gtest.h>

#include "ecbf/conic_solvers.hpp"
#include "ecbf/lmi_solver.hpp"
#include "oracles.hpp"

namespace ecbf {
namespace {

QpProblem projection_qp(const Eigen::VectorXd& p) {
  QpProblem qp;
  qp.Q = Eigen::MatrixXd::Identity(p.size(), p.size());
  qp.q = -2.0 * p;
  qp.G = Eigen::MatrixXd::Zero(0, p.size());
  qp.h = Eigen::VectorXd::Zero(0);
  return qp;
}

TEST(QpSolver, UnconstrainedMinimum) {
  const Solution sol = solve_qp(projection_qp(Eigen::Vector3d(1, -2, 3)));
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_LE((sol.x_star - Eigen::Vector3d(1, -2, 3)).norm(), 1e-12);
}

TEST(QpSolver, HalfSpaceProjectionOracle) {
  const oracle::Tally t = oracle::qp_halfspace_projection(1000, 31);
  EXPECT_TRUE(t.ok()) << t.failures << " failures, worst " << t.worst << ": " << t.first_failure;
}

TEST(QpSolver, BoxBoundsClip) {
  QpProblem qp = projection_qp(Eigen::Vector2d(5, -5));
  qp.lower = Eigen::Vector2d(-1, -1);
  qp.upper = Eigen::Vector2d(1, 1);
  const Solution sol = solve_qp(qp);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.x_star(0), 1.0, 1e-10);
  EXPECT_NEAR(sol.x_star(1), -1.0, 1e-10);
}

TEST(QpSolver, InfiniteBoundsAreIgnored) {
  QpProblem qp = projection_qp(Eigen::Vector2d(5, -5));
  const double inf = std::numeric_limits<double>::infinity();
  qp.lower = Eigen::Vector2d(-inf, -inf);
  qp.upper = Eigen::Vector2d(inf, inf);
  const Solution sol = solve_qp(qp);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_LE((sol.x_star - Eigen::Vector2d(5, -5)).norm(), 1e-10);
}

TEST(QpSolver, ContradictoryConstraintsAreInfeasible) {
  QpProblem qp = projection_qp(Eigen::Vector2d(0, 0));
  qp.G = Eigen::MatrixXd(2, 2);
  qp.G << 1, 0, -1, 0;  // x0 <= -1 and x0 >= 1
  qp.h = Eigen::Vector2d(-1, -1);
  EXPECT_EQ(solve_qp(qp).status, SolveStatus::infeasible);
}

TEST(QpSolver, ReportsSolveTime) {
  const Solution sol = solve_qp(projection_qp(Eigen::Vector2d(1, 1)));
  EXPECT_GE(sol.solve_time_us, 0.0);
}

TEST(SocpSolver, UnitBallProjectionOracle) {
  const oracle::Tally t = oracle::socp_ball_projection(500, 32);
  EXPECT_TRUE(t.ok()) << t.failures << " failures, worst " << t.worst << ": " << t.first_failure;
}

TEST(SocpSolver, InteriorPointIsReturnedUnchanged) {
  SocpProblem p;
  p.qp = projection_qp(Eigen::Vector2d(0.3, -0.2));
  p.cone = {Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 1.0};
  const Solution sol = solve_socp(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_LE((sol.x_star - Eigen::Vector2d(0.3, -0.2)).norm(), 1e-6);
}

TEST(SocpSolver, DegenerateConeIsInfeasible) {
  // ||x|| <= -1 has no solution.
  SocpProblem p;
  p.qp = projection_qp(Eigen::Vector2d(1, 1));
  p.cone = {Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), -1.0};
  EXPECT_EQ(solve_socp(p).status, SolveStatus::infeasible);
}

TEST(SocpSolver, ZeroConeMatrixMatchesQp) {
  // ||0|| <= f'x + d is the half-space -f'x <= d.
  oracle::Sampler s(33);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd p = s.vector(3, -3, 3);
    const Eigen::VectorXd f = s.vector(3, -1, 1);
    const double d = s.uniform(-1, 1);
    SocpProblem cone;
    cone.qp = projection_qp(p);
    cone.cone = {Eigen::MatrixXd::Zero(2, 3), Eigen::Vector2d::Zero(), f, d};
    QpProblem half = projection_qp(p);
    half.G = -f.transpose();
    half.h = Eigen::VectorXd::Constant(1, d);
    const Solution a = solve_socp(cone);
    const Solution b = solve_qp(half);
    ASSERT_EQ(a.status, SolveStatus::optimal);
    ASSERT_EQ(b.status, SolveStatus::optimal);
    EXPECT_LE((a.x_star - b.x_star).norm(), 1e-10);
  }
}

TEST(SocpSolver, ConeWithLinearConstraints) {
  // Projection of (2, 0) onto the unit ball intersected with x1 >= 0.5.
  SocpProblem p;
  p.qp = projection_qp(Eigen::Vector2d(2, 0));
  p.qp.G = Eigen::RowVector2d(0, -1);
  p.qp.h = Eigen::VectorXd::Constant(1, -0.5);
  p.cone = {Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 1.0};
  const Solution sol = solve_socp(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.x_star(0), std::sqrt(0.75), 1e-6);
  EXPECT_NEAR(sol.x_star(1), 0.5, 1e-6);
}

TEST(Hypograph, MatchesSignEnumeration) {
  const oracle::Tally t = oracle::hypograph_vs_enumeration(500, 34);
  EXPECT_TRUE(t.ok()) << t.failures << " failures, worst " << t.worst << ": " << t.first_failure;
}

TEST(Hypograph, FoldsKnownTerms) {
  const HypographBlock hb = hypograph_reformulate(1.0, Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 2),
                                                  {std::nullopt, -0.5});
  EXPECT_DOUBLE_EQ(hb.folded_constant, 0.0);
  EXPECT_EQ(hb.num_decision, 1);
  EXPECT_EQ(hb.num_aux, 1);
  ASSERT_EQ(hb.decision_index.size(), 1u);
  EXPECT_EQ(hb.decision_index[0], 0);
  EXPECT_EQ(hb.G.rows(), 3);
  EXPECT_EQ(hb.G.cols(), 2);
}

TEST(Hypograph, EqualSlopesNeedNoAuxiliary) {
  const HypographBlock hb = hypograph_reformulate(0.5, Eigen::Vector2d(1, -2), Eigen::Vector2d(1, -2),
                                                  {std::nullopt, std::nullopt});
  EXPECT_EQ(hb.num_aux, 0);
  ASSERT_EQ(hb.G.rows(), 1);
  // The single row is -(u0 - 2 u1) <= 0.5.
  EXPECT_DOUBLE_EQ(hb.G(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(hb.G(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(hb.h(0), 0.5);
}

TEST(Hypograph, RowsDescribeTheMinSum) {
  // For any u, the largest feasible t gives sum t = sum min(b- u, b+ u).
  oracle::Sampler s(35);
  const Eigen::Vector3d bm(-1.0, 0.5, 2.0);
  const Eigen::Vector3d bp(1.0, 1.5, 2.0);
  const HypographBlock hb =
      hypograph_reformulate(0.7, bm, bp, {std::nullopt, std::nullopt, std::nullopt});
  ASSERT_EQ(hb.num_aux, 2);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d u = s.vector(3, -2, 2);
    Eigen::VectorXd z(5);
    z.head<3>() = u;
    z(3) = std::min(bm(0) * u(0), bp(0) * u(0));
    z(4) = std::min(bm(1) * u(1), bp(1) * u(1));
    const double min_sum = 0.7 + z(3) + z(4) + bm(2) * u(2);
    const Eigen::VectorXd slack = hb.h - hb.G * z;
    EXPECT_GE(slack.head(4).minCoeff(), -1e-12);
    EXPECT_NEAR(slack(4), min_sum, 1e-12);
  }
}

TEST(Hypograph, RejectsBadInput) {
  EXPECT_THROW(hypograph_reformulate(0.0, Eigen::Vector2d(2, 0), Eigen::Vector2d(1, 0),
                                     {std::nullopt, std::nullopt}),
               std::invalid_argument);
  EXPECT_THROW(hypograph_reformulate(0.0, Eigen::Vector2d(0, 0), Eigen::Vector3d(1, 0, 0),
                                     {std::nullopt, std::nullopt}),
               std::invalid_argument);
  EXPECT_THROW(hypograph_reformulate(0.0, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0),
                                     {std::nullopt}),
               std::invalid_argument);
}

TEST(LmiSolver, ScalarSchurComplement) {
  // minimize y subject to [y 1; 1 1] >= 0, optimum y = 1.
  LmiProblem p;
  p.c = Eigen::VectorXd::Ones(1);
  LmiBlock block;
  block.F0 = (Eigen::Matrix2d() << 0, 1, 1, 1).finished();
  block.F = {(Eigen::Matrix2d() << 1, 0, 0, 0).finished()};
  p.blocks = {block};
  const LmiSolution sol = solve_lmi(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-6);
  EXPECT_GE(sol.min_eigenvalue, 0.0);
}

TEST(LmiSolver, LargestEigenvalueMinimization) {
  // minimize t subject to t I - M >= 0; optimum is the largest eigenvalue of M.
  const Eigen::Matrix3d M = (Eigen::Matrix3d() << 2, 1, 0, 1, 3, 1, 0, 1, 4).finished();
  LmiProblem p;
  p.c = Eigen::VectorXd::Ones(1);
  p.blocks = {{-M, {Eigen::MatrixXd::Identity(3, 3)}}};
  const LmiSolution sol = solve_lmi(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(M);
  EXPECT_NEAR(sol.objective, eig.eigenvalues().maxCoeff(), 1e-6);
}

TEST(LmiSolver, DetectsInfeasibility) {
  // y >= 1 and -y >= 0 cannot hold together.
  LmiProblem p;
  p.c = Eigen::VectorXd::Ones(1);
  p.blocks = {{Eigen::MatrixXd::Constant(1, 1, -1.0), {Eigen::MatrixXd::Ones(1, 1)}},
              {Eigen::MatrixXd::Zero(1, 1), {-Eigen::MatrixXd::Ones(1, 1)}}};
  EXPECT_EQ(solve_lmi(p).status, SolveStatus::infeasible);
}

TEST(LmiSolver, BlockEvaluation) {
  const LmiBlock block{Eigen::Matrix2d::Identity(),
                       {Eigen::Matrix2d::Ones(), (Eigen::Matrix2d() << 0, 1, 1, 0).finished()}};
  const Eigen::MatrixXd v = block.evaluate(Eigen::Vector2d(2, -1));
  EXPECT_TRUE(v.isApprox((Eigen::Matrix2d() << 3, 1, 1, 3).finished()));
}

}  // namespace
}  // namespace ecbf
