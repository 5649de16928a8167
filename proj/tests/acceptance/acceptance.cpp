// Acceptance checks: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msopt/bench.hpp"
#include "msopt/bounds.hpp"
#include "msopt/constraints.hpp"
#include "msopt/grid.hpp"
#include "msopt/multiscale.hpp"
#include "msopt/problems.hpp"
#include "msopt/solver.hpp"
#include "msopt/tucker.hpp"
#include "oracles.hpp"

using namespace msopt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
              secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Dense Hessian of a quadratic objective from its gradient.
Matrix dense_hessian(const ProblemAtScale& p) {
  Index n = p.dimension;
  Vector g0 = p.gradient(Vector::Zero(n));
  Matrix H(n, n);
  for (Index j = 0; j < n; ++j) H.col(j) = p.gradient(Vector::Unit(n, j)) - g0;
  return 0.5 * (H + H.transpose());
}

QuadraticFamily quad_family(int S, double mu, bool diagonal, std::uint64_t seed, double L_f) {
  std::mt19937_64 rng(seed);
  QuadraticFamilySpec qs;
  qs.S = S;
  qs.lower = -1.0;
  qs.upper = 1.0;
  qs.L = 1.0;
  qs.mu = mu;
  qs.diagonal = diagonal;
  qs.seed = seed;
  qs.solution = oracle::random_pl(-1.0, 1.0, L_f, 5, rng);
  qs.solution_lipschitz = L_f;
  return make_quadratic_family(qs);
}

// Motivating-example runs shared by criteria 8, 9 and 10.
bench::MotivatingResult motivating(int lo, int hi, int trials, bench::PlanSpec plan) {
  bench::BenchConfig c;
  c.scale_min = lo;
  c.scale_max = hi;
  c.trials = trials;
  c.seed = 20240;
  c.plan = plan;
  c.trace_stride = 1000;
  return bench::run_motivating(c);
}

std::vector<bench::MotivatingRun> s10_runs, trend_runs, lazy_runs;
std::vector<bench::TuckerRun> tucker_runs;

}  // namespace

int main() {
  report(1, "operator algebra", [] {
    std::mt19937_64 rng(1);
    std::int64_t bad = 0;
    for (int t = 0; t < 10000; ++t) {
      int k = 1 + int(rng() % 10);
      Index n = dyadic_points(k);
      Vector x = oracle::uniform(n, rng);
      Vector y = interpolate(x);
      if (y.size() != 2 * n - 1 || coarsen(y).size() != n) ++bad;
      if (coarsen(y) != x) ++bad;
      Vector mids = free_variables(x);
      if (mids.size() != n - 1) ++bad;
      Mask m = midpoint_mask(2 * n - 1);
      for (Index i = 0; i < 2 * n - 1; ++i) {
        if (m[size_t(i)] != (i % 2 == 1)) ++bad;
        if (i % 2 == 1 && mids[i / 2] != y[i]) ++bad;
      }
    }
    for (int S = 1; S <= 14; ++S) {
      ScaleHierarchy h(-1.0 - 0.1 * S, 2.0 + 0.37 * S, S);
      for (int s = 1; s <= S; ++s) {
        if (h.points(s) != (Index(1) << (S - s + 1)) + 1) ++bad;
        if (s == S) continue;
        Grid1D fine = h.grid(s), coarse = h.grid(s + 1);
        for (Index i = 0; i < coarse.points(); ++i) {
          if (coarse.node(i) != fine.node(2 * i)) ++bad;
        }
      }
    }
    for (int t = 0; t < 500; ++t) {
      std::vector<Index> dims = {Index(1 + rng() % 3), dyadic_points(1 + int(rng() % 3)),
                                 dyadic_points(1 + int(rng() % 3))};
      DenseTensor T(dims);
      for (double& v : T.storage()) v = std::uniform_real_distribution<double>(-1, 1)(rng);
      std::set<Index> modes = {1, 2};
      DenseTensor back = coarsen_tensor(interpolate_tensor(T, modes), modes);
      if (back.dims() != T.dims() ||
          !std::equal(back.values().begin(), back.values().end(), T.values().begin())) {
        ++bad;
      }
    }
    return Outcome{bad == 0, std::to_string(bad) + " mismatches over 10000 vectors, 14 hierarchies, 500 tensors"};
  });

  report(2, "pointwise interpolation bound and witness", [] {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    std::int64_t violations = 0;
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
      double lo = -3 * u(rng), hi = lo + 0.05 + 4 * u(rng), L = 0.1 + 5 * u(rng);
      auto f = oracle::random_pl(lo, hi, L, 1 + int(rng() % 12), rng);
      double a = lo + (hi - lo) * u(rng), b = a + (hi - a) * u(rng);
      if (b <= a) continue;
      double l1 = u(rng), l2 = 1.0 - l1;
      double gap = std::abs(f(l1 * a + l2 * b) - (l1 * f(a) + l2 * f(b)));
      double bound = bounds::lipschitz_interp_bound(L, l1, l2, b - a);
      worst = std::max(worst, gap / std::max(bound, 1e-300));
      if (gap > bound * (1 + 1e-12) + 1e-14) ++violations;
    }
    double witness_gap = 0.0;
    for (int t = 0; t < 1000; ++t) {
      double l1 = u(rng), l2 = 1.0 - l1;
      double lo = -5 * u(rng), hi = lo + 0.1 + 5 * u(rng), L = 0.1 + 10 * u(rng);
      auto w = bounds::tight_witness(l1, l2, lo, hi, L);
      double gap = std::abs(w(l1 * lo + l2 * hi) - (l1 * w(lo) + l2 * w(hi)));
      double bound = bounds::lipschitz_interp_bound(L, l1, l2, hi - lo);
      witness_gap = std::max(witness_gap, oracle::rel(gap, bound));
    }
    return Outcome{violations == 0 && witness_gap <= 1e-12,
                   std::to_string(violations) + " violations, max ratio " + fmt("%.6f", worst) +
                       ", witness rel gap " + fmt("%.2e", witness_gap)};
  });

  report(3, "exact and inexact interpolation bounds", [] {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    std::normal_distribution<double> normal;
    std::int64_t violations = 0, trials = 0;
    double worst_exact = 0.0, worst_inexact = 0.0;
    for (int k = 1; k <= 10; ++k) {
      Index I = dyadic_points(k);
      for (int t = 0; t < 1000; ++t) {
        double lo = -2 * u(rng), w = 0.1 + 4 * u(rng), L = 0.1 + 5 * u(rng);
        auto f = oracle::random_pl(lo, lo + w, L, 1 + int(rng() % 20), rng);
        Vector xc = sample(f, Grid1D(lo, lo + w, I)).values;
        Vector xf = sample(f, Grid1D(lo, lo + w, 2 * I - 1)).values;
        double e = (interpolate(xc) - xf).norm();
        double be = bounds::exact_interp_bound(L, I, w);
        Vector delta(I);
        double scale = std::pow(10.0, -4.0 + 4.0 * u(rng));
        for (Index i = 0; i < I; ++i) delta[i] = scale * normal(rng);
        double ei = (interpolate(xc + delta) - xf).norm();
        double bi = bounds::inexact_interp_bound(L, I, w, delta.norm());
        worst_exact = std::max(worst_exact, e / be);
        worst_inexact = std::max(worst_inexact, ei / bi);
        if (e > be * (1 + 1e-12)) ++violations;
        if (ei > bi * (1 + 1e-12)) ++violations;
        trials += 2;
      }
    }
    return Outcome{violations == 0, std::to_string(violations) + "/" + std::to_string(trials) +
                                        " violations, max ratio exact " + fmt("%.4f", worst_exact) +
                                        ", inexact " + fmt("%.4f", worst_inexact)};
  });

  report(4, "constraint scaling slacks", [] {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    std::int64_t violations = 0, even = 0, odd = 0;
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
      Index I = 4 + Index(rng() % 254);
      (I % 2 ? odd : even)++;
      double lo = -u(rng), w = 0.5 + 2 * u(rng), Lf = 3 * u(rng);
      auto f = oracle::random_pl(lo, lo + w, Lf, 1 + int(rng() % 6), rng);
      Grid1D grid(lo, lo + w, I);
      Vector x = sample(f, grid).values;

      RescaledTarget l1 = l1_rescale_with_bound(x.sum(), I, Lf, w);
      double dev = std::abs(coarsen(x).sum() - l1.scalar());
      if (dev > l1.slack_bound * (1 + 1e-12) + 1e-12) ++violations;
      if (l1.slack_bound > 0) worst = std::max(worst, dev / l1.slack_bound);

      // K linear constraints with Lipschitz rows.
      Index K = 1 + Index(rng() % 3);
      Matrix A(K, I);
      double fs = 0.0;
      for (int k = 0; k <= 4000; ++k) fs = std::max(fs, std::abs(f(lo + w * k / 4000.0)));
      fs += Lf * w / 4000.0;
      double Lfg = 0.0;
      for (Index r = 0; r < K; ++r) {
        double Lg = 3 * u(rng);
        auto g = oracle::random_pl(lo, lo + w, Lg, 1 + int(rng() % 6), rng);
        A.row(r) = sample(g, grid).values.transpose();
        double gs = 0.0;
        for (int k = 0; k <= 4000; ++k) gs = std::max(gs, std::abs(g(lo + w * k / 4000.0)));
        gs += Lg * w / 4000.0;
        Lfg = std::max(Lfg, product_lipschitz(Lf, Lg, fs, gs));
      }
      RescaledTarget lin = linear_rescale_with_bound(A * x, I, Lfg, w);
      Matrix Abar = subsample_columns(A);
      Vector xbar = coarsen(x);
      Vector direct(K);
      for (Index r = 0; r < K; ++r) {
        double s = 0.0;
        for (Index i = 0; i < I; i += 2) s += A(r, i) * x[i];
        direct[r] = s;
      }
      if ((Abar * xbar - direct).norm() > 1e-12 * (1 + direct.norm())) ++violations;
      double ldev = (Abar * xbar - lin.target).norm();
      if (ldev > lin.slack_bound * (1 + 1e-12) + 1e-12) ++violations;
      if (lin.slack_bound > 0) worst = std::max(worst, ldev / lin.slack_bound);
    }
    // Normalized samples: coarse mass tends to 1/2 as I doubles.
    int envelope_bad = 0;
    for (int t = 0; t < 50; ++t) {
      double L = 0.5 + 4 * u(rng);
      auto g = oracle::random_pl(0.0, 2.0, L, 2 + int(rng() % 8), rng);
      auto f = [&](double s) { return 1.0 + 2.0 * L + g(s); };
      std::vector<double> dev;
      for (int k = 4; k <= 10; ++k) {
        Vector x = sample(f, Grid1D(0.0, 2.0, dyadic_points(k))).values;
        dev.push_back(std::abs(coarsen(x / x.sum()).sum() - 0.5));
      }
      std::vector<double> env(dev.size());
      double m = 0.0;
      for (size_t i = dev.size(); i-- > 0;) env[i] = m = std::max(m, dev[i]);
      for (size_t i = 1; i < env.size(); ++i) {
        if (env[i] > env[i - 1]) ++envelope_bad;
      }
      if (!(env.back() < env.front())) ++envelope_bad;
    }
    return Outcome{violations == 0 && envelope_bad == 0 && even > 0 && odd > 0,
                   std::to_string(violations) + " violations (" + std::to_string(even) + " even, " +
                       std::to_string(odd) + " odd I), max slack use " + fmt("%.4f", worst) +
                       ", envelope breaks " + std::to_string(envelope_bad) + "/50"};
  });

  report(5, "greedy and lazy error bounds on quadratic families", [] {
    std::mt19937_64 rng(5);
    std::int64_t violations = 0, checks = 0, uncertified = 0;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      int S = 3 + t % 4;
      bool diag = (t / 4) % 2 == 0;
      double mu = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
      double Lf = std::uniform_real_distribution<double>(0.2, 5.0)(rng);
      QuadraticFamily q = quad_family(S, mu, diag, rng(), Lf);
      // Certify q and the minimizers by dense solves.
      std::vector<Vector> xstar;
      for (int s = 1; s <= S; ++s) {
        ProblemAtScale p = q.family.make_problem(s);
        Matrix H = dense_hessian(p);
        Eigen::SelfAdjointEigenSolver<Matrix> es(H);
        double L = es.eigenvalues().maxCoeff(), m = es.eigenvalues().minCoeff();
        if ((L - m) / (L + m) > q.q + 1e-12) ++uncertified;
        xstar.push_back(H.ldlt().solve(-p.gradient(Vector::Zero(p.dimension))));
      }
      std::vector<std::int64_t> K(static_cast<size_t>(S));
      for (auto& k : K) k = std::int64_t(rng() % 8);
      Vector x0 = gaussian_vector(q.family.hierarchy.points(S), rng());
      bounds::BoundInputs bi{Lf, q.q, S, K, 2.0, (x0 - xstar.back()).norm()};
      auto plan = IterationPlan::fixed(K);
      double g = (greedy_solve(q.family, plan, x0).x - xstar[0]).norm();
      double gb = bounds::greedy_error_bound(bi);
      worst = std::max(worst, g / gb);
      ++checks;
      if (g > gb * (1 + 1e-10) + 1e-12) ++violations;
      if (diag) {
        double l = (lazy_solve(q.family, plan, x0).x - xstar[0]).norm();
        double lb = bounds::lazy_error_bound_general(bi);
        worst = std::max(worst, l / lb);
        ++checks;
        if (l > lb * (1 + 1e-10) + 1e-12) ++violations;
        std::vector<std::int64_t> Kc(static_cast<size_t>(S), K[0]);
        bounds::BoundInputs bc = bi;
        bc.K = Kc;
        double lc = (lazy_solve(q.family, IterationPlan::fixed(Kc), x0).x - xstar[0]).norm();
        double lcb = bounds::lazy_error_bound_constK(bc);
        ++checks;
        if (lc > lcb * (1 + 1e-10) + 1e-12) ++violations;
      }
    }
    return Outcome{violations == 0 && uncertified == 0,
                   std::to_string(violations) + "/" + std::to_string(checks) +
                       " violations, max ratio " + fmt("%.4f", worst) + ", uncertified q " +
                       std::to_string(uncertified)};
  });

  report(6, "piecewise-linear distance, approximation and connection", [] {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    const long panels = 1000000;
    // Equality case: matching endpoint samples.
    double eq_worst = 0.0, exact_formula_err = 0.0;
    for (int t = 0; t < 5; ++t) {
      double lo = -u(rng), w = 0.5 + 2 * u(rng);
      Index I = 3 + Index(rng() % 60);
      Grid1D grid(lo, lo + w, I);
      Vector x = oracle::uniform(I, rng), y = oracle::uniform(I, rng);
      y[0] = x[0];
      y[I - 1] = x[I - 1];
      SampledFunction sx(grid, x), sy(grid, y);
      double sq = oracle::simpson(
          [&](double s) {
            double d = piecewise_eval(sx, s) - piecewise_eval(sy, s);
            return d * d;
          },
          lo, lo + w, panels);
      Vector d = x - y;
      double exact = 0.0;
      for (Index i = 0; i + 1 < I; ++i) exact += d[i] * d[i] + d[i] * d[i + 1] + d[i + 1] * d[i + 1];
      exact *= grid.spacing() / 3.0;
      exact_formula_err = std::max(exact_formula_err, oracle::rel(sq, exact));
      double stated = std::pow(bounds::piecewise_distance_bound(grid.spacing(), d.norm()), 2);
      eq_worst = std::max(eq_worst, oracle::rel(sq, stated));
    }
    // Approximation bound.
    int approx_bad = 0;
    for (int t = 0; t < 20; ++t) {
      double L = 0.5 + 4 * u(rng), w = 0.5 + 2 * u(rng);
      auto f = oracle::random_pl(0.0, w, L, 2 + int(rng() % 10), rng);
      Grid1D grid(0.0, w, 2 + Index(rng() % 40));
      SampledFunction s = sample(f, grid);
      double err = std::sqrt(oracle::simpson(
          [&](double v) {
            double e = f(v) - piecewise_eval(s, v);
            return e * e;
          },
          0.0, w, panels));
      if (err > bounds::piecewise_approx_bound(L, w, grid.spacing()) + 1e-9) ++approx_bad;
    }
    // End-to-end guarantee: I from the threshold, samples perturbed by the
    // largest allowed discrete error in a random and in a constant direction.
    int e2e_bad = 0;
    double e2e_worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      double L = 0.5 + 4 * u(rng), w = 0.5 + 2 * u(rng);
      auto f = oracle::random_pl(0.0, w, L, 2 + int(rng() % 10), rng);
      double C = bounds::connection_thresholds(L, w, 1.0).C;
      double eps = C / (4.0 + 2000.0 * u(rng));
      auto th = bounds::connection_thresholds(L, w, eps);
      int k = 1;
      while (double(dyadic_points(k)) < th.I_min) ++k;
      Grid1D grid(0.0, w, dyadic_points(k));
      Vector base = sample(f, grid).values;
      for (int dir = 0; dir < 2; ++dir) {
        Vector delta = dir == 0 ? oracle::uniform(grid.points(), rng) : Vector::Ones(grid.points());
        delta *= th.discrete_err_max / delta.norm();
        SampledFunction s(grid, base + delta);
        double err = std::sqrt(oracle::simpson(
            [&](double v) {
              double e = f(v) - piecewise_eval(s, v);
              return e * e;
            },
            0.0, w, panels));
        e2e_worst = std::max(e2e_worst, err / eps);
        if (!(err < eps)) ++e2e_bad;
      }
    }
    bool pass = eq_worst <= 1e-8 && approx_bad == 0 && e2e_bad == 0;
    return Outcome{pass, "equality case rel gap " + fmt("%.3e", eq_worst) +
                             " (exact neighbour formula agrees to " + fmt("%.1e", exact_formula_err) +
                             "), approx violations " + std::to_string(approx_bad) +
                             "/20, end-to-end violations " + std::to_string(e2e_bad) +
                             "/40 (max err/eps " + fmt("%.3f", e2e_worst) + ")"};
  });

  report(7, "expected PGD error from Gaussian starts", [] {
    const int S = 6;
    const Index n = dyadic_points(S);
    const double L = 1.0, mu = 0.25;
    std::mt19937_64 rng(7);
    Matrix Q = Eigen::HouseholderQR<Matrix>(Matrix::Random(n, n)).householderQ();
    Vector eig = Vector::LinSpaced(n, mu, L);
    Matrix H = Q * eig.asDiagonal() * Q.transpose();
    double q = (L - mu) / (L + mu);
    bool ok = true;
    std::ostringstream out;
    for (int kind = 0; kind < 2; ++kind) {
      Vector xs = kind == 0 ? Vector(oracle::uniform(n, rng).normalized()) : Vector(Vector::Zero(n));
      ProblemAtScale p;
      p.dimension = n;
      p.objective = [&, xs](const Vector& x) { return 0.5 * (x - xs).dot(H * (x - xs)); };
      p.gradient = [&, xs](const Vector& x) -> Vector { return H * (x - xs); };
      p.smoothness = L;
      p.strong_convexity = mu;
      UpdateRule rule = pgd_rule(p);
      const double eps = 1e-3;
      std::int64_t Keps = bounds::pgd_iterations_needed(eps, q, S);
      for (std::int64_t K : {std::int64_t(0), std::int64_t(5), std::int64_t(10), Keps}) {
        double mean = 0.0;
        const int draws = 20000;
        for (int t = 0; t < draws; ++t) {
          Vector x0 = gaussian_vector(n, std::uint64_t(draws * kind + t + 1));
          RunResult r = run(p, x0, StoppingRule::iterations(K), rule);
          mean += (r.x - xs).norm() / draws;
        }
        double bound = K == Keps ? eps : bounds::expected_pgd_bound(q, K, S);
        ok = ok && mean <= bound;
        out << (kind == 0 ? "unit" : "zero") << " K=" << K << " " << fmt("%.3g", mean) << "<="
            << fmt("%.3g", bound) << (K == Keps && kind == 1 ? "" : "; ");
      }
    }
    return Outcome{ok, out.str()};
  });

  // Benchmark runs reused below.
  {
    auto r9 = motivating(10, 10, 20, bench::PlanSpec::parse("greedy-one-per-coarse"));
    s10_runs = r9.runs;
    auto r10 = motivating(3, 9, 20, bench::PlanSpec::parse("greedy-one-per-coarse"));
    trend_runs = r10.runs;
    auto rl = motivating(3, 8, 2, bench::PlanSpec::parse("lazy(3)"));
    lazy_runs = rl.runs;
  }

  report(8, "cost model", [] {
    std::int64_t violations = 0, runs = 0;
    double worst = 0.0;
    auto check = [&](double measured, double bound) {
      ++runs;
      worst = std::max(worst, measured / bound);
      if (measured > bound * (1 + 1e-12)) ++violations;
    };
    for (const auto* set : {&s10_runs, &trend_runs}) {
      for (const auto& r : *set) check(r.cost_units, greedy_cost_bound(r.steps_by_scale, {}));
    }
    for (const auto& r : lazy_runs) {
      if (r.lazy) {
        // The bench lazy plan frees every coordinate at the fine scale.
        check(r.cost_units, lazy_cost_bound(r.steps_by_scale, {}) + 0.5 * double(r.steps_by_scale[0]));
      } else {
        check(r.cost_units, greedy_cost_bound(r.steps_by_scale, {}));
      }
    }
    std::int64_t over_k = 0, plans = 0;
    std::mt19937_64 rng(8);
    for (std::int64_t K = 3; K <= 30; K += 3) {
      for (int S = 2; S <= 8; ++S) {
        QuadraticFamily q = quad_family(S, 0.5, true, rng(), 1.0);
        Index fine = q.family.hierarchy.fine_points();
        Vector x0 = gaussian_vector(q.family.hierarchy.points(S), rng());
        for (auto v : {GreedyVariant::kUniform, GreedyVariant::kOnePerCoarse}) {
          IterationPlan plan = greedy_plan(K, v, S);
          double c = measured_cost(greedy_solve(q.family, plan, x0).trace, 1.0, fine).units;
          check(c, greedy_cost_bound(plan.iteration_counts(), {}));
          ++plans;
          if (!(c < double(K))) ++over_k;
        }
        IterationPlan lp = lazy_plan(K, S);
        double c = measured_cost(lazy_solve(q.family, lp, x0).trace, 1.0, fine).units;
        check(c, lazy_cost_bound(lp.iteration_counts(), {}));
        ++plans;
        if (!(c < double(K))) ++over_k;
      }
    }
    return Outcome{violations == 0 && over_k == 0,
                   std::to_string(violations) + "/" + std::to_string(runs) +
                       " runs above bound (max ratio " + fmt("%.4f", worst) + "), " +
                       std::to_string(over_k) + "/" + std::to_string(plans) + " reduced plans cost >= K"};
  });

  report(9, "motivating example at S=10", [] {
    std::vector<double> single, multi, ratio;
    for (int t = 0; t < 20; ++t) {
      double a = 0, b = 0;
      for (const auto& r : s10_runs) {
        if (r.trial != t) continue;
        (r.method == "single" ? a : b) = double(r.fine_iters);
      }
      single.push_back(a);
      multi.push_back(b);
      ratio.push_back(a / b);
    }
    double mr = median(ratio);
    return Outcome{mr >= 3.0, "median fine iterations single " + fmt("%.0f", median(single)) +
                                  ", multiscale " + fmt("%.0f", median(multi)) +
                                  ", median ratio " + fmt("%.1f", mr) + " over 20 seeds"};
  });

  report(10, "cost trend over S=3..10", [] {
    std::vector<bench::MotivatingRun> all = trend_runs;
    all.insert(all.end(), s10_runs.begin(), s10_runs.end());
    std::vector<double> ls, lm, li;
    bool dominated = true;
    std::ostringstream out;
    long capped = std::count_if(all.begin(), all.end(), [](const auto& r) { return r.capped; });
    if (capped > 0) out << capped << " single runs stopped at the iteration cap; ";
    for (int S = 3; S <= 10; ++S) {
      std::vector<double> a, b;
      for (const auto& r : all) {
        if (r.S != S) continue;
        (r.method == "single" ? a : b).push_back(r.cost_units);
      }
      double ma = median(a), mb = median(b);
      li.push_back(std::log(double(dyadic_points(S))));
      ls.push_back(std::log(ma));
      lm.push_back(std::log(mb));
      if (S >= 6 && mb > ma) dominated = false;
      out << "S" << S << " " << fmt("%.0f", ma) << "/" << fmt("%.1f", mb) << " ";
    }
    auto slope = [&](const std::vector<double>& y) {
      double xm = std::accumulate(li.begin(), li.end(), 0.0) / double(li.size());
      double ym = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
      double num = 0, den = 0;
      for (size_t i = 0; i < li.size(); ++i) {
        num += (li[i] - xm) * (y[i] - ym);
        den += (li[i] - xm) * (li[i] - xm);
      }
      return num / den;
    };
    double ss = slope(ls), sm = slope(lm);
    return Outcome{dominated && sm < ss, "log-log slope single " + fmt("%.2f", ss) + ", multiscale " +
                                             fmt("%.2f", sm) + "; median cost single/multi " + out.str()};
  });

  report(11, "Tucker synthetic 5x65^3", [] {
    bench::BenchConfig c;
    c.experiment = bench::Experiment::kTuckerSynthetic;
    c.scale_min = c.scale_max = 6;
    c.trials = 20;
    c.seed = 11;
    bench::TuckerResult r = bench::run_tucker(c);
    tucker_runs = r.runs;
    double ms_single = 0, ms_multi = 0;
    for (const auto& s : r.summary) (s.method == "single" ? ms_single : ms_multi) = s.median_ms;
    std::vector<double> err_single, err_multi;
    for (const auto& t : r.runs) (t.method == "single" ? err_single : err_multi).push_back(t.a_error);
    double worst = std::max(*std::max_element(err_single.begin(), err_single.end()),
                            *std::max_element(err_multi.begin(), err_multi.end()));
    bool timing = ms_multi <= 0.5 * ms_single;
    bool recovery = worst <= 0.1;
    return Outcome{timing && recovery,
                   "median ms single " + fmt("%.1f", ms_single) + ", multiscale " + fmt("%.1f", ms_multi) +
                       " (speedup " + fmt("%.2f", ms_single / ms_multi) + (timing ? ", ok" : ", short") +
                       "); aligned A error median single " + fmt("%.3f", median(err_single)) +
                       ", multiscale " + fmt("%.3f", median(err_multi)) + ", max " + fmt("%.3f", worst) +
                       (recovery ? " ok" : " above 0.1")};
  });

  report(12, "BCD descent and feasibility", [] {
    std::vector<bench::TuckerRun> runs = tucker_runs;
    bench::BenchConfig g;
    g.experiment = bench::Experiment::kTuckerGeoshape;
    g.scale_min = g.scale_max = 10;
    g.trials = 3;
    g.seed = 12;
    auto geo = bench::run_tucker(g);
    runs.insert(runs.end(), geo.runs.begin(), geo.runs.end());
    double ascent = -INFINITY, violation = 0.0;
    for (const auto& r : runs) {
      ascent = std::max(ascent, r.max_ascent);
      violation = std::max(violation, r.max_violation);
    }
    return Outcome{ascent <= 1e-12 && violation <= 1e-10 && !runs.empty(),
                   std::to_string(runs.size()) + " runs, largest half-step increase " + fmt("%.2e", ascent) +
                       ", largest violation " + fmt("%.2e", violation)};
  });

  report(13, "gradient audits", [] {
    std::mt19937_64 rng(13);
    int failed = 0, points = 0;
    std::ostringstream out;
    auto audit = [&](const std::string& name, const std::function<double(const Vector&)>& f,
                     const std::function<Vector(const Vector&)>& g,
                     const std::function<Vector()>& draw) {
      double worst = 0.0;
      for (int t = 0; t < 100; ++t) {
        Vector x = draw();
        Vector a = g(x), fd = oracle::fd_gradient(f, x, 1e-6);
        double r = (a - fd).norm() / std::max(a.norm(), 1e-8);
        worst = std::max(worst, r);
        ++points;
        if (r > 1e-5) ++failed;
      }
      out << name << " " << fmt("%.1e", worst) << "; ";
    };
    LegendreProblemSpec spec;
    spec.S = 5;
    ProblemFamily lf = make_family(spec);
    for (int s = 1; s <= 5; ++s) {
      ProblemAtScale p = lf.make_problem(s);
      audit("legendre s" + std::to_string(s), p.objective, p.gradient,
            [&] { return oracle::uniform(p.dimension, rng, 0, 2.0 / double(p.dimension)); });
    }
    for (bool diag : {true, false}) {
      QuadraticFamily q = quad_family(4, 0.3, diag, 99, 2.0);
      for (int s = 1; s <= 4; ++s) {
        ProblemAtScale p = q.family.make_problem(s);
        audit(std::string(diag ? "diag" : "dense") + " s" + std::to_string(s), p.objective, p.gradient,
              [&] { return oracle::uniform(p.dimension, rng); });
      }
    }
    DenseTensor Y({4, 5, 6});
    for (double& v : Y.storage()) v = std::uniform_real_distribution<double>(0, 1)(rng);
    tucker::Factors base = tucker::random_factors(Y.dims(), 3, {1, 1.0}, 5);
    auto fa = [&](const Vector& a) {
      tucker::Factors f = base;
      f.A = Eigen::Map<const Matrix>(a.data(), 4, 3);
      return tucker::objective(Y, f);
    };
    auto ga = [&](const Vector& a) -> Vector {
      tucker::Factors f = base;
      f.A = Eigen::Map<const Matrix>(a.data(), 4, 3);
      Matrix g = tucker::gradient_a(Y, f);
      return Eigen::Map<const Vector>(g.data(), g.size());
    };
    audit("tucker A", fa, ga, [&] { return oracle::uniform(12, rng, 0, 1); });
    auto with_b = [&](const Vector& b) {
      tucker::Factors f = base;
      std::copy(b.data(), b.data() + b.size(), f.B.storage().begin());
      return f;
    };
    audit(
        "tucker B", [&](const Vector& b) { return tucker::objective(Y, with_b(b)); },
        [&](const Vector& b) -> Vector {
          DenseTensor g = tucker::gradient_b(Y, with_b(b));
          return Eigen::Map<const Vector>(g.values().data(), g.size());
        },
        [&] { return oracle::uniform(base.B.size(), rng, 0, 0.1); });
    return Outcome{failed == 0, std::to_string(failed) + "/" + std::to_string(points) +
                                    " points above 1e-5; worst " + out.str()};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
