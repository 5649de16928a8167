#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "msopt/error.hpp"
#include "msopt/problems.hpp"
#include "msopt/solver.hpp"
#include "oracles.hpp"

using namespace msopt;

namespace {

ProblemAtScale distance_problem(const Vector& target) {
  ProblemAtScale p;
  p.dimension = target.size();
  p.objective = [target](const Vector& x) { return 0.5 * (x - target).squaredNorm(); };
  p.gradient = [target](const Vector& x) { return Vector(x - target); };
  p.smoothness = p.strong_convexity = 1.0;
  return p;
}

// 0.5 x'Hx - b'x with H = Q diag(eigs) Q'.
struct Quadratic {
  Matrix H;
  Vector b;
  ProblemAtScale p;
};

Quadratic random_quadratic(Index n, double L, double mu, std::mt19937_64& rng) {
  Matrix G = Matrix::NullaryExpr(n, n, [&] { return std::normal_distribution<double>()(rng); });
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  Vector eig = oracle::uniform(n, rng, mu, L);
  eig[0] = L;
  eig[n - 1] = mu;
  Quadratic q;
  q.H = Q * eig.asDiagonal() * Q.transpose();
  q.b = oracle::uniform(n, rng);
  Matrix H = q.H;
  Vector b = q.b;
  q.p.dimension = n;
  q.p.objective = [H, b](const Vector& x) { return 0.5 * x.dot(H * x) - b.dot(x); };
  q.p.gradient = [H, b](const Vector& x) { return Vector(H * x - b); };
  q.p.hessian_apply = [H](const Vector& x) { return Vector(H * x); };
  q.p.smoothness = L;
  q.p.strong_convexity = mu;
  return q;
}

}  // namespace

TEST(PgdStep, Examples) {
  Vector target = Vector::LinSpaced(4, -1, 2);
  ProblemAtScale p = distance_problem(target);
  EXPECT_TRUE(pgd_step(p, Vector::Zero(4), 1.0).isApprox(target));

  ProblemAtScale s = distance_problem(Vector::Zero(2));
  s.constraint = ConstraintSet::scaled_simplex(1.0);
  Vector x(2);
  x << 1, 0;
  Vector y = pgd_step(s, x, 1.0);
  EXPECT_NEAR(y[0], 0.5, 1e-15);
  EXPECT_NEAR(y[1], 0.5, 1e-15);
  EXPECT_TRUE(pgd_step(s, y, 0.3).isApprox(y));
}

TEST(PgdStep, NonFiniteGradientCarriesSnapshot) {
  ProblemAtScale p = distance_problem(Vector::Zero(3));
  p.gradient = [](const Vector& x) { return Vector(x.array() / 0.0); };
  Vector x = Vector::Ones(3);
  try {
    pgd_step(p, x, 1.0);
    FAIL();
  } catch (const NumericFailure& e) {
    EXPECT_EQ(e.snapshot(), x);
    EXPECT_EQ(e.kind(), ErrorKind::kNumericFailure);
  }
}

TEST(Stepsize, Examples) {
  StepRate a = optimal_stepsize(2.0, 2.0);
  EXPECT_DOUBLE_EQ(a.alpha, 0.5);
  EXPECT_DOUBLE_EQ(*a.q, 0.0);
  StepRate b = optimal_stepsize(3.0, 1.0);
  EXPECT_DOUBLE_EQ(b.alpha, 0.5);
  EXPECT_NEAR(*b.q, 0.5, 1e-15);
  EXPECT_NEAR(rate_at_stepsize(0.5, 3.0, 1.0), 0.5, 1e-15);
  double prev = 0.0;
  for (double c = 1.5; c < 1e6; c *= 3) {
    double q = condition_rate(c, 1.0);
    EXPECT_GT(q, prev);
    EXPECT_LT(q, 1.0);
    prev = q;
  }
  StepRate z = optimal_stepsize(4.0, 0.0);
  EXPECT_DOUBLE_EQ(z.alpha, 0.25);
  EXPECT_FALSE(z.q.has_value());
}

TEST(Stepsize, TwoRateFormsAgreeAtTheOptimalStep) {
  for (double c : {1.0, 1.5, 3.0, 10.0, 1e3}) {
    double a = 2.0 / (c + 1.0);
    EXPECT_NEAR(rate_at_stepsize(a, c, 1.0), condition_rate(c, 1.0), 1e-7);
  }
}

TEST(EstimateConstants, Examples) {
  auto id = [](const Vector& v) { return v; };
  SpectralEstimate a = estimate_constants(id, 5);
  EXPECT_NEAR(a.L, 1.0, 1e-7);
  EXPECT_NEAR(a.mu, 1.0, 1e-7);

  auto d = [](const Vector& v) {
    Vector w = v;
    w[0] *= 4.0;
    return w;
  };
  SpectralEstimate b = estimate_constants(d, 2);
  EXPECT_NEAR(b.L, 4.0, 1e-6);
  EXPECT_NEAR(b.mu, 1.0, 1e-6);

  SparseMatrix G = path_laplacian(3, 1.0);
  SpectralEstimate c = estimate_constants([&](const Vector& v) { return Vector(G * v); }, 3);
  EXPECT_NEAR(c.L, 3.0, 1e-6);
  EXPECT_EQ(c.mu, 0.0);
  EXPECT_FALSE(optimal_stepsize(c.L, c.mu).q.has_value());
}

TEST(Run, ZeroIterations) {
  ProblemAtScale p = distance_problem(Vector::Ones(3));
  p.constraint = ConstraintSet::nonneg();
  Vector x0(3);
  x0 << -1, 2, 3;
  RunResult r = run(p, x0, StoppingRule::iterations(0), pgd_rule(p));
  EXPECT_EQ(r.steps, 0);
  EXPECT_EQ(r.x[0], 0.0);
  ASSERT_EQ(r.trace.records.size(), 1u);
  EXPECT_EQ(r.trace.records[0].iteration, 0);
}

TEST(Run, ExactStepStopsImmediately) {
  ProblemAtScale p = distance_problem(Vector::LinSpaced(5, 0, 1));
  RunResult r = run(p, Vector::Zero(5), StoppingRule::iterations(100), pgd_rule(1.0));
  EXPECT_EQ(r.steps, 1);
  EXPECT_EQ(r.stop_reason, "stationary");
}

TEST(Run, RejectsEmptyRule) {
  ProblemAtScale p = distance_problem(Vector::Zero(2));
  EXPECT_THROW(run(p, Vector::Zero(2), StoppingRule{}, pgd_rule(1.0)), InvalidInput);
}

TEST(Run, ContractsEveryStep) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    Index n = 3 + Index(rng() % 20);
    double L = 1.0 + 9.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    double mu = L * std::uniform_real_distribution<double>(0.02, 0.9)(rng);
    Quadratic q = random_quadratic(n, L, mu, rng);
    Vector xstar = q.H.llt().solve(q.b);
    StepRate sr = optimal_stepsize(L, mu);
    double rate = std::max(condition_rate(L, mu), rate_at_stepsize(sr.alpha, L, mu));
    Vector x0 = oracle::uniform(n, rng, -5, 5);
    std::vector<Vector> iterates;
    RunOptions opts;
    opts.observer = [&](std::int64_t, const Vector& x) { iterates.push_back(x); };
    run(q.p, x0, StoppingRule::iterations(60), pgd_rule(q.p), opts);
    double e0 = (x0 - xstar).norm();
    for (size_t k = 1; k < iterates.size(); ++k) {
      double prev = (iterates[k - 1] - xstar).norm();
      double cur = (iterates[k] - xstar).norm();
      ASSERT_LE(cur, rate * prev + 1e-10);
      ASSERT_LE(cur, std::pow(rate, double(k)) * e0 + 1e-10);
    }
  }
}

TEST(Run, FeasibleIterates) {
  std::mt19937_64 rng(22);
  Quadratic q = random_quadratic(8, 4.0, 0.5, rng);
  q.p.constraint = ConstraintSet::scaled_simplex(2.0);
  RunOptions opts;
  opts.observer = [&](std::int64_t, const Vector& x) {
    ASSERT_LE(q.p.violation(x), 1e-10);
  };
  run(q.p, oracle::uniform(8, rng, -3, 3), StoppingRule::iterations(200), pgd_rule(q.p), opts);
}

TEST(Run, StoppingCriteriaOrderAndTrace) {
  std::mt19937_64 rng(23);
  Quadratic q = random_quadratic(6, 10.0, 0.1, rng);
  Vector xstar = q.H.llt().solve(q.b);
  double fstar = q.p.objective(xstar);

  StoppingRule below;
  below.objective_below = fstar + 1e-3;
  below.max_iterations = 100000;
  RunResult a = run(q.p, Vector::Zero(6), below, pgd_rule(q.p));
  EXPECT_EQ(a.stop_reason, "objective_below");
  EXPECT_LT(q.p.objective(a.x), fstar + 1e-3);

  StoppingRule grad;
  grad.gradient_norm_below = 1e-6;
  RunResult b = run(q.p, Vector::Zero(6), grad, pgd_rule(q.p));
  EXPECT_EQ(b.stop_reason, "gradient_norm_below");
  EXPECT_LT((q.H * b.x - q.b).norm(), 1e-6);

  StoppingRule rel;
  rel.relative_decrease_below = 1e-3;
  rel.max_iterations = 5;
  RunResult c = run(q.p, Vector::Zero(6), rel, pgd_rule(q.p));
  EXPECT_TRUE(c.stop_reason == "max_iterations" || c.stop_reason == "relative_decrease");

  RunOptions opts;
  opts.trace_stride = 7;
  RunResult d = run(q.p, Vector::Zero(6), StoppingRule::iterations(50), pgd_rule(q.p), opts);
  EXPECT_EQ(d.trace.records.front().iteration, 0);
  EXPECT_EQ(d.trace.records.back().iteration, 50);
  for (size_t i = 1; i + 1 < d.trace.records.size(); ++i) {
    EXPECT_EQ(d.trace.records[i].iteration, std::int64_t(7 * i));
  }
  EXPECT_EQ(d.trace.total_steps(), 50);
  EXPECT_LE(d.trace.step_ns + d.trace.interpolate_ns + d.trace.allocate_ns, d.trace.total_ns);
}

TEST(Run, MaskedStepsLeaveFrozenEntries) {
  std::mt19937_64 rng(24);
  Quadratic q = random_quadratic(7, 2.0, 1.0, rng);
  Mask m = {false, true, false, true, false, true, false};
  RunOptions opts;
  opts.free = &m;
  Vector x0 = oracle::uniform(7, rng);
  RunResult r = run(q.p, x0, StoppingRule::iterations(30), pgd_rule(q.p), opts);
  for (Index i = 0; i < 7; ++i) {
    if (!m[size_t(i)]) EXPECT_EQ(r.x[i], x0[i]);
  }
  EXPECT_EQ(r.trace.records[0].active_dimension, 3);
}
