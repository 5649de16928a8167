#include "msopt/tucker.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "msopt/constraints.hpp"
#include "msopt/error.hpp"
#include "msopt/grid.hpp"

namespace msopt::tucker {

namespace {

using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

Index slice_count(const DenseTensor& B, Index leading) {
  if (leading < 1 || leading >= B.order()) {
    throw InvalidInput("core leading modes must be in 1..order-1");
  }
  Index n = 1;
  for (Index m = 0; m < leading; ++m) n *= B.dim(m);
  return n;
}

// Block gradients from the Gram products used by the solver.
Matrix grad_a_gram(const Matrix& A, const Matrix& BBt, const Matrix& YBt) {
  return A * BBt - YBt;
}

template <class B1Type>
RowMatrix grad_b_gram(const Matrix& AtA, const B1Type& B1, const RowMatrix& AtY) {
  return AtA * B1 - AtY;
}

double largest_eigenvalue(const Matrix& G) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

RowMatrix model_unfolded(const Matrix& A, const DenseTensor& B) {
  ConstRowMap B1 = B.unfold_first();
  return A * B1;
}

double mre_from_model(ConstRowMap Y1, const RowMatrix& X, double floor) {
  double sum = 0.0;
  std::int64_t count = 0;
  const double* y = Y1.data();
  const double* x = X.data();
  Index n = Y1.size();
  for (Index i = 0; i < n; ++i) {
    if (y[i] > floor) {
      sum += std::abs(x[i] - y[i]) / y[i];
      ++count;
    }
  }
  if (count == 0) throw UndefinedMetric("no entries above the mean relative error floor");
  return sum / double(count);
}

void check_shapes(const DenseTensor& Y, const Factors& f) {
  if (f.A.rows() != Y.dim(0) || f.A.cols() != f.B.dim(0) ||
      f.B.order() != Y.order()) {
    throw InvalidInput("factor shapes do not match the data tensor");
  }
  for (Index m = 1; m < Y.order(); ++m) {
    if (f.B.dim(m) != Y.dim(m)) throw InvalidInput("core shape does not match data");
  }
}

}  // namespace

DenseTensor mode1_product(const DenseTensor& B, const Matrix& A) {
  if (A.cols() != B.dim(0)) {
    throw InvalidInput("mode-1 product: A has " + std::to_string(A.cols()) +
                       " columns, B has first dimension " +
                       std::to_string(B.dim(0)));
  }
  std::vector<Index> dims = B.dims();
  dims[0] = A.rows();
  DenseTensor Y(dims);
  Y.unfold_first() = A * B.unfold_first();
  return Y;
}

void project_core(DenseTensor& B, const CoreConstraint& c) {
  Index n = slice_count(B, c.leading_modes);
  Index len = B.size() / n;
  for (Index i = 0; i < n; ++i) {
    project_simplex_inplace(B.storage().data() + i * len, len, c.target);
  }
}

double core_violation(const DenseTensor& B, const CoreConstraint& c) {
  Index n = slice_count(B, c.leading_modes);
  Index len = B.size() / n;
  double v = 0.0;
  const double* d = B.values().data();
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Index k = 0; k < len; ++k) {
      s += d[i * len + k];
      v = std::max(v, -d[i * len + k]);
    }
    v = std::max(v, std::abs(s - c.target));
  }
  return v;
}

double mixing_violation(const Matrix& A) {
  double v = std::max(0.0, -A.minCoeff());
  for (Index i = 0; i < A.rows(); ++i) v = std::max(v, std::abs(A.row(i).sum() - 1.0));
  return v;
}

double objective(const DenseTensor& Y, const Factors& f) {
  check_shapes(Y, f);
  return 0.5 * (model_unfolded(f.A, f.B) - Y.unfold_first()).squaredNorm();
}

Matrix gradient_a(const DenseTensor& Y, const Factors& f) {
  check_shapes(Y, f);
  ConstRowMap B1(f.B.values().data(), f.A.cols(), f.B.size() / f.A.cols());
  ConstRowMap Y1 = Y.unfold_first();
  return grad_a_gram(f.A, B1 * B1.transpose(), Y1 * B1.transpose());
}

DenseTensor gradient_b(const DenseTensor& Y, const Factors& f) {
  check_shapes(Y, f);
  ConstRowMap B1(f.B.values().data(), f.A.cols(), f.B.size() / f.A.cols());
  RowMatrix AtY = f.A.transpose() * Y.unfold_first();
  RowMatrix g = grad_b_gram(f.A.transpose() * f.A, B1, AtY);
  DenseTensor out(f.B.dims());
  std::copy(g.data(), g.data() + g.size(), out.storage().begin());
  return out;
}

double rel_error(const DenseTensor& Y, const Factors& f) {
  check_shapes(Y, f);
  double ny = Y.frobenius_norm();
  if (ny == 0) throw UndefinedMetric("relative error of a zero tensor");
  return (model_unfolded(f.A, f.B) - Y.unfold_first()).norm() / ny;
}

double mean_rel_error(const DenseTensor& Y, const Factors& f, double floor) {
  check_shapes(Y, f);
  if (floor < 0) throw InvalidInput("floor must be >= 0");
  return mre_from_model(Y.unfold_first(), model_unfolded(f.A, f.B), floor);
}

Factors random_factors(const std::vector<Index>& Y_dims, Index R,
                       const CoreConstraint& core, std::uint64_t seed) {
  if (R < 1) throw InvalidInput("rank must be >= 1");
  if (Y_dims.size() < 2) throw InvalidInput("data tensor needs at least 2 modes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Factors f;
  f.A.resize(Y_dims[0], R);
  for (Index i = 0; i < f.A.size(); ++i) f.A.data()[i] = unit(rng);
  f.A = project_row_simplex(f.A);
  std::vector<Index> bd = Y_dims;
  bd[0] = R;
  f.B = DenseTensor(bd);
  for (double& v : f.B.storage()) v = unit(rng);
  // Rescale rather than project: a Euclidean projection of a long uniform
  // vector onto the simplex keeps only a handful of entries.
  Index n = slice_count(f.B, core.leading_modes);
  Index len = f.B.size() / n;
  for (Index i = 0; i < n; ++i) {
    double* d = f.B.storage().data() + i * len;
    double s = 0.0;
    for (Index k = 0; k < len; ++k) s += d[k];
    for (Index k = 0; k < len; ++k) d[k] *= core.target / s;
  }
  return f;
}

Result bcd_factorize(const DenseTensor& Y, Index R, const Options& opts,
                     std::optional<Factors> init, int scale,
                     Clock::time_point origin) {
  if (Y.order() < 2) throw InvalidInput("data tensor needs at least 2 modes");
  if (R < 1) throw InvalidInput("rank must be >= 1");
  if (opts.max_iterations < 0) throw InvalidInput("max_iterations must be >= 0");
  for (double v : Y.values()) {
    if (!(v >= 0)) throw InvalidInput("data tensor must be nonnegative and finite");
  }
  CoreConstraint core{opts.core_leading_modes, opts.core_target};
  auto start = Clock::now();
  auto stamp = [&] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - origin)
        .count();
  };

  Result res;
  std::uint64_t reseed = opts.seed;
  res.factors = init ? std::move(*init) : random_factors(Y.dims(), R, core, reseed);
  Factors& f = res.factors;
  check_shapes(Y, f);
  if (mixing_violation(f.A) > 1e-10) f.A = project_row_simplex(f.A);
  if (core_violation(f.B, core) > 1e-10) project_core(f.B, core);

  ConstRowMap Y1 = Y.unfold_first();
  const double ynorm2 = Y1.squaredNorm();
  const double ynorm = std::sqrt(ynorm2);
  if (ynorm == 0) throw InvalidInput("data tensor is identically zero");
  const double floor = opts.mre_floor ? *opts.mre_floor : 1e-8 * Y.max();
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Index I = Y1.rows();
  const Index P = Y1.cols();
  const bool need_mre = opts.mean_rel_error_tol.has_value();
  auto fused_mre = [&](const Matrix& A, const RowMap& B1) {
    double total = 0.0;
    std::int64_t count = 0;
    for (Index i = 0; i < I; ++i) {
      const double* y = Y1.data() + i * P;
      for (Index p = 0; p < P; ++p) {
        if (y[p] > floor) {
          double x = 0.0;
          for (Index r = 0; r < R; ++r) x += A(i, r) * B1(r, p);
          total += std::abs(x - y[p]) / y[p];
          ++count;
        }
      }
    }
    if (count == 0) throw UndefinedMetric("no entries above the mean relative error floor");
    return total / double(count);
  };

  RowMatrix AtY(R, P);
  Vector old_row(P);
  double gm = 0.0;
  DescentRecord pending;
  bool have_pending = false;
  for (std::int64_t t = 0;; ++t) {
    RowMap B1 = f.B.unfold_first();
    Matrix BBt = B1 * B1.transpose();
    Matrix YBt = Y1 * B1.transpose();
    auto gram_objective = [&](const Matrix& A) {
      double v = 0.5 * (ynorm2 - 2.0 * A.cwiseProduct(YBt).sum() +
                        (A.transpose() * A).cwiseProduct(BBt).sum());
      return std::max(v, 0.0);
    };
    double fval = gram_objective(f.A);
    double rel = std::sqrt(2.0 * fval) / ynorm;
    double mre = need_mre ? fused_mre(f.A, B1) : 0.0;
    if (have_pending) {
      pending.after_b = fval;
      res.descent.push_back(pending);
      have_pending = false;
    }
    res.max_violation = std::max(
        {res.max_violation, mixing_violation(f.A), core_violation(f.B, core)});

    TraceRecord rec;
    rec.scale = scale;
    rec.iteration = t;
    rec.objective = fval;
    rec.grad_norm = gm;
    rec.t_ns = stamp();
    rec.active_dimension = f.A.size() + f.B.size();
    res.trace.records.push_back(rec);

    const char* reason = nullptr;
    if (opts.rel_error_tol && rel <= *opts.rel_error_tol) reason = "rel_error";
    else if (need_mre && mre <= *opts.mean_rel_error_tol) reason = "mean_rel_error";
    else if (opts.objective_tol && fval <= *opts.objective_tol) reason = "objective";
    else if (t >= opts.max_iterations) reason = "max_iterations";
    if (reason) {
      res.iterations = t;
      res.stop_reason = reason;
      res.final_objective = fval;
      res.final_rel_error = rel;
      try {
        res.final_mean_rel_error = need_mre ? mre : fused_mre(f.A, B1);
      } catch (const UndefinedMetric&) {
        res.final_mean_rel_error = std::numeric_limits<double>::quiet_NaN();
      }
      break;
    }

    // A block.
    double LA = largest_eigenvalue(BBt);
    if (!(LA > 0)) {
      for (double& v : f.B.storage()) v = unit(rng);
      project_core(f.B, core);
      ++res.reinitializations;
      continue;
    }
    Matrix A_new = project_row_simplex(f.A - grad_a_gram(f.A, BBt, YBt) / LA);
    double after_a = gram_objective(A_new);
    double dA = (A_new - f.A).norm() * LA;
    f.A = std::move(A_new);

    // B block.
    Matrix AtA = f.A.transpose() * f.A;
    double LB = largest_eigenvalue(AtA);
    if (!(LB > 0)) {
      for (Index i = 0; i < f.A.size(); ++i) f.A.data()[i] = unit(rng);
      f.A = project_row_simplex(f.A);
      ++res.reinitializations;
      continue;
    }
    AtY.noalias() = f.A.transpose() * Y1;
    const Index slices_per_r = slice_count(f.B, core.leading_modes) / R;
    const Index len = P / slices_per_r;
    double dB2 = 0.0;
    auto project_row = [&](Index r) {
      for (Index j = 0; j < slices_per_r; ++j) {
        project_simplex_inplace(B1.row(r).data() + j * len, len, core.target);
      }
    };
    if (opts.subblock_updates) {
      for (Index r = 0; r < R; ++r) {
        double Lr = AtA(r, r);
        if (!(Lr > 0)) continue;
        old_row = B1.row(r).transpose();
        B1.row(r) -= (AtA.row(r) * B1 - AtY.row(r)) / Lr;
        project_row(r);
        dB2 += (B1.row(r).transpose() - old_row).squaredNorm() * Lr * Lr;
      }
    } else {
      RowMatrix step = grad_b_gram(AtA, B1, AtY) / LB;
      for (Index r = 0; r < R; ++r) {
        old_row = B1.row(r).transpose();
        B1.row(r) -= step.row(r);
        project_row(r);
        dB2 += (B1.row(r).transpose() - old_row).squaredNorm() * LB * LB;
      }
    }
    gm = std::sqrt(dA * dA + dB2);

    if (opts.record_descent) {
      pending.before = fval;
      pending.after_a = after_a;
      have_pending = true;
    }
  }

  ScaleSummary sum;
  sum.scale = scale;
  sum.steps = res.iterations;
  sum.dimension = Y.size();
  sum.active_dimension = Y.size();
  sum.stop_reason = res.stop_reason;
  res.trace.scales.push_back(sum);
  res.trace.total_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
  res.trace.step_ns = res.trace.total_ns;
  return res;
}

Result multiscale_factorize(const DenseTensor& Y, Index R,
                            const std::set<Index>& continuous_dims,
                            const Options& opts,
                            std::optional<Options> coarse_opts,
                            Clock::time_point origin) {
  if (continuous_dims.empty()) return bcd_factorize(Y, R, opts, std::nullopt, 1, origin);
  std::optional<int> level;
  for (Index d : continuous_dims) {
    if (d < 1 || d >= Y.order()) {
      throw InvalidInput("continuous dims must name data modes 2..N");
    }
    auto k = dyadic_level(Y.dim(d));
    if (!k) {
      throw InvalidInput("continuous mode " + std::to_string(d + 1) + " has length " +
                         std::to_string(Y.dim(d)) + ", expected 2^k + 1");
    }
    if (level && *level != *k) {
      throw InvalidInput("continuous modes must share the same length");
    }
    level = k;
  }
  const int S = *level;
  auto start = Clock::now();
  auto elapsed = [](Clock::time_point a) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - a).count();
  };

  Result out;
  std::vector<DenseTensor> pyramid;
  auto t0 = Clock::now();
  pyramid.push_back(Y);
  for (int s = 2; s <= S; ++s) pyramid.push_back(coarsen_tensor(pyramid.back(), continuous_dims));
  out.trace.allocate_ns += elapsed(t0);

  auto target_at = [&](int s) {
    double t = opts.core_target;
    for (Index d : continuous_dims) {
      if (d >= opts.core_leading_modes) {
        t *= double(pyramid[size_t(s - 1)].dim(d)) / double(Y.dim(d));
      }
    }
    return t;
  };

  std::optional<Factors> current;
  for (int s = S; s >= 1; --s) {
    Options o = (s > 1 && coarse_opts) ? *coarse_opts : opts;
    o.core_target = target_at(s);
    o.core_leading_modes = opts.core_leading_modes;
    o.seed = opts.seed;
    Result r = bcd_factorize(pyramid[size_t(s - 1)], R, o, std::move(current), s, origin);
    out.trace.append(r.trace);
    out.descent.insert(out.descent.end(), r.descent.begin(), r.descent.end());
    out.max_violation = std::max(out.max_violation, r.max_violation);
    out.reinitializations += r.reinitializations;
    if (s == 1) {
      out.factors = std::move(r.factors);
      out.iterations = r.iterations;
      out.stop_reason = r.stop_reason;
      out.final_rel_error = r.final_rel_error;
      out.final_mean_rel_error = r.final_mean_rel_error;
      out.final_objective = r.final_objective;
      break;
    }
    t0 = Clock::now();
    Factors next;
    next.A = std::move(r.factors.A);
    next.B = interpolate_tensor(r.factors.B, continuous_dims);
    CoreConstraint c{opts.core_leading_modes, target_at(s - 1)};
    Index n = slice_count(next.B, c.leading_modes);
    Index len = next.B.size() / n;
    for (Index i = 0; i < n; ++i) {
      double* d = next.B.storage().data() + i * len;
      double sum = 0.0;
      for (Index k = 0; k < len; ++k) sum += d[k];
      if (sum > 0) {
        for (Index k = 0; k < len; ++k) d[k] *= c.target / sum;
      } else {
        for (Index k = 0; k < len; ++k) d[k] = c.target / double(len);
      }
    }
    out.trace.interpolate_ns += elapsed(t0);
    TraceRecord rec;
    rec.scale = s - 1;
    rec.t_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - origin)
                   .count();
    rec.phase = Phase::kInterpolate;
    rec.active_dimension = next.A.size() + next.B.size();
    rec.objective = 0.5 * (model_unfolded(next.A, next.B) -
                           pyramid[size_t(s - 2)].unfold_first())
                              .squaredNorm();
    out.trace.records.push_back(rec);
    current = std::move(next);
  }
  out.trace.total_ns = elapsed(start);
  return out;
}

std::vector<Index> hungarian(const Matrix& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw InvalidInput("assignment needs a square cost matrix");
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials formulation; p[j] is the row matched to column j.
  std::vector<double> u(size_t(n + 1), 0.0), v(size_t(n + 1), 0.0);
  std::vector<Index> p(size_t(n + 1), 0), way(size_t(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(size_t(n + 1), inf);
    std::vector<bool> used(size_t(n + 1), false);
    do {
      used[size_t(j0)] = true;
      Index i0 = p[size_t(j0)];
      Index j1 = 0;
      double delta = inf;
      for (Index j = 1; j <= n; ++j) {
        if (used[size_t(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[size_t(i0)] - v[size_t(j)];
        if (cur < minv[size_t(j)]) {
          minv[size_t(j)] = cur;
          way[size_t(j)] = j0;
        }
        if (minv[size_t(j)] < delta) {
          delta = minv[size_t(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[size_t(j)]) {
          u[size_t(p[size_t(j)])] += delta;
          v[size_t(j)] -= delta;
        } else {
          minv[size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[size_t(j0)] != 0);
    do {
      Index j1 = way[size_t(j0)];
      p[size_t(j0)] = p[size_t(j1)];
      j0 = j1;
    } while (j0);
  }
  // row_of_col -> assignment row i gets column col_of_row[i].
  std::vector<Index> col_of_row(static_cast<size_t>(n));
  for (Index j = 1; j <= n; ++j) col_of_row[size_t(p[size_t(j)] - 1)] = j - 1;
  return col_of_row;
}

std::vector<Index> align_columns(const Matrix& A, const Matrix& A_true) {
  if (A.rows() != A_true.rows() || A.cols() != A_true.cols()) {
    throw InvalidInput("alignment needs equal shapes");
  }
  Index R = A.cols();
  Matrix cost(R, R);  // rows: true columns, cols: recovered columns
  for (Index j = 0; j < R; ++j) {
    for (Index k = 0; k < R; ++k) cost(j, k) = (A_true.col(j) - A.col(k)).cwiseAbs().sum();
  }
  return hungarian(cost);
}

double aligned_max_error(const Matrix& A, const Matrix& A_true) {
  auto perm = align_columns(A, A_true);
  double e = 0.0;
  for (Index j = 0; j < A.cols(); ++j) {
    e = std::max(e, (A.col(perm[size_t(j)]) - A_true.col(j)).cwiseAbs().maxCoeff());
  }
  return e;
}

namespace {

double normal_pdf(double x, double m, double sd) {
  double z = (x - m) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double uniform_pdf(double x, double a, double b) {
  return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
}

double exponential_pdf(double x, double scale) {
  return x >= 0 ? std::exp(-x / scale) / scale : 0.0;
}

void normalize_blocks(DenseTensor& T, Index blocks) {
  Index len = T.size() / blocks;
  for (Index i = 0; i < blocks; ++i) {
    double* d = T.storage().data() + i * len;
    double s = 0.0;
    for (Index k = 0; k < len; ++k) s += d[k];
    if (s > 0) {
      for (Index k = 0; k < len; ++k) d[k] /= s;
    }
  }
}

}  // namespace

Mixture synth_mixtures(const MixtureSpec& spec) {
  Grid1D g(spec.lower, spec.upper, spec.points);
  Vector t = g.nodes();
  const Index K = spec.points;
  using Pdf = std::function<double(double)>;
  const std::vector<std::vector<Pdf>> marginals = {
      {[](double x) { return normal_pdf(x, 4, 1); },
       [](double x) { return uniform_pdf(x, -7, 2); },
       [](double x) { return uniform_pdf(x, -1, 1); }},
      {[](double x) { return normal_pdf(x, 0, 3); },
       [](double x) { return uniform_pdf(x, -2, 2); },
       [](double x) { return exponential_pdf(x, 2); }},
      {[](double x) { return exponential_pdf(x, 1); },
       [](double x) { return normal_pdf(x, 0, 1); },
       [](double x) { return normal_pdf(x, 0, 3); }},
  };
  Mixture mix;
  mix.A_true.resize(5, 3);
  mix.A_true << 0.0, 0.4, 0.6,
                0.3, 0.3, 0.4,
                0.8, 0.2, 0.0,
                0.2, 0.7, 0.1,
                0.6, 0.1, 0.3;
  const Index R = 3;
  DenseTensor raw({R, K, K, K});
  for (Index r = 0; r < R; ++r) {
    std::vector<Vector> m(3, Vector(K));
    for (int j = 0; j < 3; ++j) {
      for (Index k = 0; k < K; ++k) m[size_t(j)][k] = marginals[size_t(r)][size_t(j)](t[k]);
    }
    double* d = raw.storage().data() + r * K * K * K;
    for (Index a = 0; a < K; ++a) {
      for (Index b = 0; b < K; ++b) {
        double ab = m[0][a] * m[1][b];
        for (Index c = 0; c < K; ++c) d[(a * K + b) * K + c] = ab * m[2][c];
      }
    }
  }
  mix.Y = mode1_product(raw, mix.A_true);
  normalize_blocks(mix.Y, mix.Y.dim(0));
  mix.sources = std::move(raw);
  normalize_blocks(mix.sources, R);
  return mix;
}

Geoshape geoshape_synthetic(const GeoshapeSpec& spec) {
  if (spec.I < 1 || spec.J < 1 || spec.K < 2 || spec.R < 1 || spec.noise < 0) {
    throw InvalidInput("invalid geoshape dimensions");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  Grid1D g(0.0, 1.0, spec.K);
  Geoshape out;
  out.B_true = DenseTensor({spec.R, spec.J, spec.K});
  for (Index r = 0; r < spec.R; ++r) {
    for (Index j = 0; j < spec.J; ++j) {
      int comps = 1 + int(rng() % 3);
      std::vector<double> mean(static_cast<size_t>(comps)), sd(static_cast<size_t>(comps)), w(static_cast<size_t>(comps));
      for (int c = 0; c < comps; ++c) {
        mean[size_t(c)] = 0.1 + 0.8 * unit(rng);
        sd[size_t(c)] = 0.03 + 0.12 * unit(rng);
        w[size_t(c)] = 0.2 + unit(rng);
      }
      double* d = out.B_true.storage().data() + (r * spec.J + j) * spec.K;
      for (Index k = 0; k < spec.K; ++k) {
        double v = 0.0;
        for (int c = 0; c < comps; ++c) {
          v += w[size_t(c)] * normal_pdf(g.node(k), mean[size_t(c)], sd[size_t(c)]);
        }
        d[k] = v;
      }
    }
  }
  normalize_blocks(out.B_true, spec.R * spec.J);
  out.A_true.resize(spec.I, spec.R);
  for (Index i = 0; i < spec.I; ++i) {
    for (Index r = 0; r < spec.R; ++r) out.A_true(i, r) = unit(rng);
    out.A_true.row(i) /= out.A_true.row(i).sum();
  }
  out.Y = mode1_product(out.B_true, out.A_true);
  if (spec.noise > 0) {
    for (double& v : out.Y.storage()) v *= std::max(0.0, 1.0 + spec.noise * normal(rng));
  }
  normalize_blocks(out.Y, spec.I * spec.J);
  return out;
}

namespace {

constexpr char kMagic[5] = {'M', 'S', 'O', 'T', '1'};

template <class T>
T byteswap_if_needed(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

DenseTensor read_csv_tensor(std::istream& in, const std::string& path) {
  std::string line;
  std::vector<std::vector<Index>> idx;
  std::vector<double> vals;
  size_t arity = 0;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!std::isdigit(static_cast<unsigned char>(line[0]))) continue;  // header
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) throw IoError(path + ":" + std::to_string(lineno) + ": too few columns");
    if (arity == 0) arity = cells.size() - 1;
    if (cells.size() - 1 != arity) {
      throw IoError(path + ":" + std::to_string(lineno) + ": inconsistent column count");
    }
    std::vector<Index> ix(arity);
    try {
      for (size_t m = 0; m < arity; ++m) {
        long long v = std::stoll(cells[m]);
        if (v < 1) throw IoError(path + ": indices are 1-based");
        ix[m] = Index(v - 1);
      }
      vals.push_back(std::stod(cells[arity]));
    } catch (const std::logic_error&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
    idx.push_back(std::move(ix));
  }
  if (idx.empty()) throw IoError(path + ": no tensor entries");
  std::vector<Index> dims(arity, 0);
  for (const auto& ix : idx) {
    for (size_t m = 0; m < arity; ++m) dims[m] = std::max(dims[m], ix[m] + 1);
  }
  DenseTensor T(dims);
  for (size_t e = 0; e < idx.size(); ++e) T.at(idx[e]) = vals[e];
  return T;
}

}  // namespace

DenseTensor read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char head[5] = {};
  in.read(head, 5);
  if (in.gcount() == 5 && std::memcmp(head, kMagic, 5) == 0) {
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    n = byteswap_if_needed(n);
    if (!in || n == 0 || n > 32) throw IoError(path + ": bad tensor header");
    std::vector<Index> dims(n);
    for (auto& d : dims) {
      std::uint32_t v = 0;
      in.read(reinterpret_cast<char*>(&v), 4);
      d = Index(byteswap_if_needed(v));
    }
    if (!in) throw IoError(path + ": truncated header");
    Index total = 1;
    for (Index d : dims) {
      if (d < 1) throw IoError(path + ": zero dimension");
      total *= d;
    }
    std::vector<double> vals(static_cast<size_t>(total));
    in.read(reinterpret_cast<char*>(vals.data()), std::streamsize(total * 8));
    if (in.gcount() != std::streamsize(total * 8)) throw IoError(path + ": truncated values");
    for (double& v : vals) v = byteswap_if_needed(v);
    return DenseTensor(std::move(dims), std::move(vals));
  }
  in.clear();
  in.seekg(0);
  return read_csv_tensor(in, path);
}

void write_tensor(const std::string& path, const DenseTensor& T) {
  if (ends_with(path, ".csv")) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (Index m = 0; m < T.order(); ++m) out << 'i' << (m + 1) << ',';
    out << "value\n";
    std::vector<Index> ix(size_t(T.order()), 0);
    char buf[32];
    for (Index flat = 0; flat < T.size(); ++flat) {
      for (Index m = 0; m < T.order(); ++m) out << (ix[size_t(m)] + 1) << ',';
      std::snprintf(buf, sizeof buf, "%.17g", T[flat]);
      out << buf << '\n';
      for (Index m = T.order() - 1; m >= 0; --m) {
        if (++ix[size_t(m)] < T.dim(m)) break;
        ix[size_t(m)] = 0;
      }
    }
    if (!out) throw IoError("write failed for " + path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, 5);
  std::uint32_t n = byteswap_if_needed(std::uint32_t(T.order()));
  out.write(reinterpret_cast<const char*>(&n), 4);
  for (Index d : T.dims()) {
    std::uint32_t v = byteswap_if_needed(std::uint32_t(d));
    out.write(reinterpret_cast<const char*>(&v), 4);
  }
  for (double v : T.values()) {
    double w = byteswap_if_needed(v);
    out.write(reinterpret_cast<const char*>(&w), 8);
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace msopt::tucker
