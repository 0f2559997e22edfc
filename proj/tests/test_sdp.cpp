#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "roa/sdp.hpp"

using namespace roa::sdp;

namespace {

void add_sym(std::vector<Entry>& out, int blk, const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = i; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) out.push_back({blk, i, j, m(i, j)});
    }
  }
}

double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); }

Eigen::MatrixXd random_sym(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
}

// max x s.t. [[1, x], [x, 1]] >= 0, as max b.y with S = C - y A.
Problem two_by_two() {
  Problem p;
  p.add_block(2);
  p.add_constraint(1.0);
  p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
  p.constraints[0] = {{0, 0, 1, -1.0}};
  return p;
}

struct Constructed {
  Problem problem;
  double optimum = 0.0;
  std::vector<Eigen::MatrixXd> X;
};

// Strictly complementary pair: X* = Q diag(d, 0) Q^T, S* = Q diag(0, e) Q^T,
// C = S* + sum y*_j A_j, b = A(X*). Then C.X* = b.y* and both are optimal.
Constructed constructed(std::uint64_t seed, const std::vector<int>& dims, int m, int rank) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  std::normal_distribution<double> g;
  Constructed c;
  std::vector<Eigen::MatrixXd> S, C;
  for (int d : dims) {
    c.problem.add_block(d);
    const int n = std::abs(d);
    Eigen::VectorXd xd = Eigen::VectorXd::Zero(n), sd = Eigen::VectorXd::Zero(n);
    const int r = std::min(rank, n);
    for (int i = 0; i < n; ++i) (i < r ? xd(i) : sd(i)) = pos(rng);
    if (d > 0) {
      const Eigen::MatrixXd q = random_orthogonal(rng, n);
      c.X.push_back(q * xd.asDiagonal() * q.transpose());
      S.push_back(q * sd.asDiagonal() * q.transpose());
    } else {
      c.X.push_back(xd.asDiagonal());
      S.push_back(sd.asDiagonal());
    }
  }
  C = S;
  Eigen::VectorXd y(m);
  for (int j = 0; j < m; ++j) y(j) = g(rng);
  for (int j = 0; j < m; ++j) {
    double b = 0.0;
    c.problem.add_constraint(0.0);
    for (std::size_t k = 0; k < dims.size(); ++k) {
      Eigen::MatrixXd a = dims[k] > 0 ? random_sym(rng, dims[k]) : Eigen::MatrixXd(random_sym(rng, -dims[k]).diagonal().asDiagonal());
      add_sym(c.problem.constraints[static_cast<std::size_t>(j)], static_cast<int>(k), a);
      b += inner(a, c.X[k]);
      C[k] += y(j) * a;
    }
    c.problem.rhs[static_cast<std::size_t>(j)] = b;
  }
  for (std::size_t k = 0; k < dims.size(); ++k) {
    add_sym(c.problem.objective, static_cast<int>(k), C[k]);
    c.optimum += inner(C[k], c.X[k]);
  }
  c.problem.canonicalize();
  return c;
}

}  // namespace

TEST(Solver, AnalyticTwoByTwo) {
  const Solution s = solve(two_by_two());
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.dual_obj, 1.0, 1e-7);
  EXPECT_NEAR(s.y(0), 1.0, 1e-6);
  EXPECT_LE(std::abs(s.primal_obj - s.dual_obj), 1e-7 * (1 + std::abs(s.dual_obj)));
}

TEST(Solver, TraceWithFixedCorner) {
  // min tr X s.t. X_11 = 2 -> X = diag(2, 0, 0).
  Problem p;
  p.add_block(3);
  for (int i = 0; i < 3; ++i) p.objective.push_back({0, i, i, 1.0});
  p.add_constraint(2.0);
  p.constraints[0] = {{0, 0, 0, 1.0}};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.primal_obj, 2.0, 1e-7 * 3.0);
  EXPECT_NEAR(s.X[0](0, 0), 2.0, 1e-6);
  EXPECT_NEAR(s.X[0](1, 1), 0.0, 1e-6);
}

TEST(Solver, FreeVariable) {
  // min u s.t. X_11 - u = 1, X >= 0 -> u = -1.
  Problem p;
  p.add_block(1);
  p.add_constraint(1.0);
  p.constraints[0] = {{0, 0, 0, 1.0}};
  const int u = p.add_free(1.0);
  p.free_vars[static_cast<std::size_t>(u)].coeffs = {{0, -1.0}};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.primal_obj, -1.0, 1e-7);
  EXPECT_NEAR(s.u(0), -1.0, 1e-6);
}

TEST(Solver, ConstructedOptimaRecovered) {
  const std::vector<std::vector<int>> shapes{{4}, {5, 3}, {6, -4}, {3, 3, -2}};
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto& dims = shapes[seed % shapes.size()];
    const Constructed c = constructed(seed, dims, 6, 2);
    const Solution s = solve(c.problem);
    ASSERT_TRUE(s.status == Status::optimal || s.status == Status::near_optimal) << "seed " << seed;
    EXPECT_NEAR(s.primal_obj, c.optimum, 1e-6 * (1 + std::abs(c.optimum))) << "seed " << seed;
    EXPECT_NEAR(s.dual_obj, c.optimum, 1e-6 * (1 + std::abs(c.optimum))) << "seed " << seed;
    EXPECT_GE(s.primal_obj, s.dual_obj - 1e-9 * (1 + std::abs(s.primal_obj)));
    EXPECT_GE(min_eigenvalue(s.X, c.problem.block_dims), -1e-8);
    EXPECT_GE(min_eigenvalue(s.S, c.problem.block_dims), -1e-8);
  }
}

TEST(Solver, IdentityOptimumRecovered) {
  // Full rank: X* is positive definite, so S* = 0 and C = sum y*_j A_j.
  const Constructed c = constructed(42, {5}, 8, 5);
  const Solution s = solve(c.problem);
  ASSERT_TRUE(s.status == Status::optimal || s.status == Status::near_optimal);
  EXPECT_NEAR(s.primal_obj, c.optimum, 1e-6 * (1 + std::abs(c.optimum)));
}

TEST(Solver, Deterministic) {
  const Constructed c = constructed(7, {4, -3}, 5, 2);
  const Solution a = solve(c.problem), b = solve(c.problem);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.primal_obj, b.primal_obj);
  EXPECT_EQ(a.dual_obj, b.dual_obj);
}

TEST(Solver, InfeasibleIsNotOptimal) {
  // X >= 0 with X_11 = -1 has no solution.
  Problem p;
  p.add_block(2);
  p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
  p.add_constraint(-1.0);
  p.constraints[0] = {{0, 0, 0, 1.0}};
  const Solution s = solve(p);
  EXPECT_NE(s.status, Status::optimal);
  EXPECT_NE(s.status, Status::near_optimal);
}

TEST(Problem, ValidateRejectsBadIndices) {
  Problem p = two_by_two();
  EXPECT_NO_THROW(p.validate());
  p.constraints[0].push_back({0, 1, 0, 1.0});
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = two_by_two();
  p.constraints[0].push_back({3, 0, 0, 1.0});
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = two_by_two();
  p.add_block(-2);
  p.objective.push_back({1, 0, 1, 1.0});
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Problem, CanonicalizeSumsDuplicates) {
  Problem p = two_by_two();
  p.constraints[0].push_back({0, 0, 1, 0.5});
  p.constraints[0].push_back({0, 0, 0, 0.0});
  p.canonicalize();
  ASSERT_EQ(p.constraints[0].size(), 1u);
  EXPECT_DOUBLE_EQ(p.constraints[0][0].value, -0.5);
}
