#include "msopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "msopt/error.hpp"

namespace msopt {

double legendre_binomial(int m, double t) {
  if (m < 0) throw InvalidInput("Legendre degree must be >= 0");
  // Alternating terms cancel heavily for t < 0; sum in extended precision.
  long double z = (static_cast<long double>(t) - 1.0L) / 2.0L;
  long double sum = 0.0L;
  long double zk = 1.0L;
  long double cmk = 1.0L;   // C(m, k)
  long double cmkk = 1.0L;  // C(m + k, k)
  for (int k = 0; k <= m; ++k) {
    sum += cmk * cmkk * zk;
    cmk = cmk * (m - k) / (k + 1);
    cmkk = cmkk * (m + k + 1) / (k + 1);
    zk *= z;
  }
  return std::sqrt((2.0 * m + 1.0) / 2.0) * static_cast<double>(sum);
}

double legendre_recurrence(int m, double t) {
  if (m < 0) throw InvalidInput("Legendre degree must be >= 0");
  double p0 = 1.0;
  double p1 = t;
  if (m == 0) p1 = p0;
  for (int n = 1; n < m; ++n) {
    double p2 = ((2.0 * n + 1.0) * t * p1 - double(n) * p0) / double(n + 1);
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt((2.0 * m + 1.0) / 2.0) * p1;
}

double legendre_value(int m, double t) {
  if (!(t >= -1.0 && t <= 1.0)) throw OutOfDomain("Legendre argument outside [-1, 1]");
  return m <= 12 ? legendre_binomial(m, t) : legendre_recurrence(m, t);
}

double default_density(double t) {
  return (((-2.625 * t - 1.35) * t + 2.4) * t + 1.35) * t + 0.225;
}

void LegendreProblemSpec::validate() const {
  if (M < 1) throw InvalidInput("M must be >= 1");
  if (first_degree < 0) throw InvalidInput("first degree must be >= 0");
  if (S < 1 || S > 24) throw InvalidInput("S must be in 1..24");
  if (lambda < 0) throw InvalidInput("lambda must be >= 0");
  if (noise_level < 0) throw InvalidInput("noise level must be >= 0");
  if (!density) throw InvalidInput("ground-truth density is unset");
}

SparseMatrix path_laplacian(Index n, double prefactor) {
  if (n < 2) throw InvalidInput("Laplacian needs at least 2 nodes");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(size_t(3 * n));
  for (Index i = 0; i < n; ++i) {
    double diag = (i == 0 || i == n - 1) ? 1.0 : 2.0;
    trips.emplace_back(i, i, diag * prefactor);
    if (i + 1 < n) {
      trips.emplace_back(i, i + 1, -prefactor);
      trips.emplace_back(i + 1, i, -prefactor);
    }
  }
  SparseMatrix G(n, n);
  G.setFromTriplets(trips.begin(), trips.end());
  return G;
}

MeasurementData build_fine_operators(const LegendreProblemSpec& spec) {
  spec.validate();
  Grid1D grid(-1.0, 1.0, dyadic_points(spec.S));
  MeasurementData d;
  Index I = grid.points();
  d.operator_fine.resize(spec.M, I);
  for (Index i = 0; i < I; ++i) {
    double t = grid.node(i);
    for (int m = 0; m < spec.M; ++m) {
      d.operator_fine(m, i) = legendre_value(spec.first_degree + m, t);
    }
  }
  double dt = grid.spacing();
  d.laplacian_fine = path_laplacian(I, 1.0 / (dt * dt * dt));
  return d;
}

ScaledOperators scale_operators(const Matrix& A1, const SparseMatrix& G1,
                                int s) {
  if (s < 1) throw InvalidInput("scale must be >= 1");
  Index I1 = A1.cols();
  if (G1.rows() != I1 || G1.cols() != I1) {
    throw InvalidInput("operator and Laplacian sizes differ");
  }
  Index stride = Index{1} << (s - 1);
  if ((I1 - 1) % stride != 0 || (I1 - 1) / stride < 2) {
    throw InvalidInput("scale too coarse for this grid");
  }
  Index Is = (I1 - 1) / stride + 1;
  ScaledOperators out;
  out.A.resize(A1.rows(), Is);
  for (Index j = 0; j < Is; ++j) {
    out.A.col(j) = double(stride) * A1.col(j * stride);
  }
  double pref1 = G1.coeff(0, 0);
  out.G = path_laplacian(Is, pref1 / double(stride));
  return out;
}

Vector gaussian_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

MeasurementData generate_measurements(const LegendreProblemSpec& spec) {
  MeasurementData d = build_fine_operators(spec);
  Grid1D grid(-1.0, 1.0, dyadic_points(spec.S));
  Index I = grid.points();
  d.x_true.resize(I);
  for (Index i = 0; i < I; ++i) {
    d.x_true[i] = std::max(spec.density(grid.node(i)), 0.0) * grid.spacing();
  }
  double total = d.x_true.sum();
  if (!(total > 0)) throw InvalidInput("ground-truth density has no mass");
  d.x_true /= total;
  d.clean = d.operator_fine * d.x_true;
  double sigma = spec.noise_level * d.clean.norm() / std::sqrt(double(spec.M));
  d.y = d.clean;
  if (sigma > 0) d.y += sigma * gaussian_vector(spec.M, spec.seed);
  return d;
}

namespace {

// Largest size for which the constants come from a dense eigensolve.
constexpr Index kDenseSpectrum = 2049;

// Constants of H = AᵀA + λG on the sum-zero subspace, the directions the
// simplex-constrained iterates can move in. Power iteration stalls on the
// clustered top of λG and reads L low by more than μ, so small problems
// are solved exactly.
SpectralEstimate simplex_constants(const Matrix& A, const SparseMatrix& G,
                                   double lambda) {
  Index n = A.cols();
  auto center = [](const Vector& v) -> Vector {
    return v.array() - v.mean();
  };
  if (n > kDenseSpectrum) {
    auto H = [&](const Vector& v) -> Vector {
      return A.transpose() * (A * v) + lambda * (G * v);
    };
    return estimate_constants(H, n, 1e-8, 10000, center);
  }
  Matrix H = A.transpose() * A + lambda * Matrix(G);
  Vector mean = H.rowwise().mean();
  H.colwise() -= mean;
  H.rowwise() -= H.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  // Drop the eigenpair along the constant vector.
  Index drop = 0;
  (es.eigenvectors().colwise().sum().cwiseAbs()).maxCoeff(&drop);
  SpectralEstimate est;
  est.converged = true;
  est.L = 0.0;
  est.mu = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (i == drop) continue;
    est.L = std::max(est.L, es.eigenvalues()[i]);
    est.mu = std::min(est.mu, es.eigenvalues()[i]);
  }
  if (n == 1) est.mu = est.L = 0.0;
  est.mu = std::clamp(est.mu, 0.0, est.L);
  if (est.mu < 1e-12 * est.L) est.mu = 0.0;
  return est;
}

}  // namespace

std::shared_ptr<const LegendreOperators> LegendreOperators::build(
    const LegendreProblemSpec& spec) {
  auto ops = std::make_shared<LegendreOperators>();
  ops->spec = spec;
  ops->hierarchy = ScaleHierarchy(-1.0, 1.0, spec.S);
  MeasurementData fine = build_fine_operators(spec);
  for (int s = 1; s <= spec.S; ++s) {
    ScaledOperators so = scale_operators(fine.operator_fine, fine.laplacian_fine, s);
    double lambda = spec.lambda;
    const Matrix& A = so.A;
    const SparseMatrix& G = so.G;
    ops->constants.push_back(simplex_constants(A, G, lambda));
    ops->per_scale.push_back(std::move(so));
  }
  return ops;
}

ProblemAtScale legendre_problem(const LegendreOperators& ops, const Vector& y,
                                int s) {
  const auto& so = ops.per_scale.at(size_t(s - 1));
  const auto& c = ops.constants.at(size_t(s - 1));
  if (y.size() != so.A.rows()) throw InvalidInput("measurement length mismatch");
  const Matrix* A = &so.A;
  const SparseMatrix* G = &so.G;
  double lambda = ops.spec.lambda;
  ProblemAtScale p;
  p.scale = s;
  p.dimension = so.A.cols();
  p.objective = [A, G, y, lambda](const Vector& x) {
    Vector r = *A * x - y;
    return 0.5 * r.squaredNorm() + 0.5 * lambda * x.dot(*G * x);
  };
  p.gradient = [A, G, y, lambda](const Vector& x) -> Vector {
    Vector r = *A * x - y;
    return A->transpose() * r + lambda * (*G * x);
  };
  p.hessian_apply = [A, G, lambda](const Vector& v) -> Vector {
    return A->transpose() * (*A * v) + lambda * (*G * v);
  };
  Index I1 = ops.hierarchy.fine_points();
  p.constraint = ConstraintSet::scaled_simplex(double(p.dimension) / double(I1));
  p.smoothness = c.L;
  p.strong_convexity = c.mu;
  return p;
}

ProblemFamily make_family(std::shared_ptr<const LegendreOperators> ops,
                          const Vector& y) {
  ProblemFamily f;
  f.hierarchy = ops->hierarchy;
  f.cost_exponent = 1.0;
  f.make_problem = [ops, y](int s) { return legendre_problem(*ops, y, s); };
  return f;
}

ProblemFamily make_family(const LegendreProblemSpec& spec) {
  MeasurementData d = generate_measurements(spec);
  return make_family(LegendreOperators::build(spec), d.y);
}

ReferenceSolution reference_optimum(const ProblemAtScale& p, const Vector& x0,
                                    double tol, std::int64_t max_iterations) {
  if (!(p.smoothness > 0)) throw InvalidInput("reference solve needs L > 0");
  double alpha = 1.0 / p.smoothness;
  auto mapping_norm = [&](const Vector& x) {
    return (x - p.project(x - alpha * p.gradient(x))).norm() / alpha;
  };
  Vector x = p.project(x0);
  Vector y = x;
  double fx = p.objective(x);
  double t = 1.0;
  double scale = std::max(1.0, mapping_norm(x));
  double best = fx;
  std::int64_t last_gain = 0;
  ReferenceSolution out;
  std::int64_t k = 0;
  for (; k < max_iterations; ++k) {
    Vector xn = p.project(y - alpha * p.gradient(y));
    double fn = p.objective(xn);
    if (!std::isfinite(fn)) throw NumericFailure("reference solve diverged", y);
    if (fn > fx) {
      // Adaptive restart: drop the momentum and take a plain step from x.
      t = 1.0;
      y = x;
      xn = p.project(x - alpha * p.gradient(x));
      fn = p.objective(xn);
    }
    double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + ((t - 1.0) / tn) * (xn - x);
    x = std::move(xn);
    fx = fn;
    t = tn;
    if (fx < best - 1e-15 * std::abs(best)) {
      best = fx;
      last_gain = k;
    }
    if (k % 100 == 0 || k - last_gain > 5000) {
      double gm = mapping_norm(x);
      if (gm <= tol * scale || k - last_gain > 5000) {
        out.grad_norm = gm;
        break;
      }
    }
  }
  out.iterations = k;
  out.objective = fx;
  if (out.grad_norm == 0.0) out.grad_norm = mapping_norm(x);
  out.x = std::move(x);
  return out;
}

std::function<double(double)> random_lipschitz_function(double lower,
                                                        double upper, double L,
                                                        int pieces,
                                                        std::uint64_t seed) {
  if (pieces < 1 || !(upper > lower) || L < 0) {
    throw InvalidInput("invalid random Lipschitz function parameters");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> knots(static_cast<size_t>(pieces + 1));
  knots[0] = lower;
  knots[size_t(pieces)] = upper;
  std::vector<double> inner(static_cast<size_t>(pieces - 1));
  for (auto& v : inner) v = lower + (upper - lower) * unit(rng);
  std::sort(inner.begin(), inner.end());
  std::copy(inner.begin(), inner.end(), knots.begin() + 1);
  std::vector<double> slopes(static_cast<size_t>(pieces));
  for (auto& v : slopes) v = L * (2.0 * unit(rng) - 1.0);
  slopes[size_t(rng() % std::uint64_t(pieces))] = unit(rng) < 0.5 ? -L : L;
  std::vector<double> values(static_cast<size_t>(pieces + 1));
  values[0] = 2.0 * unit(rng) - 1.0;
  for (int i = 0; i < pieces; ++i) {
    values[size_t(i + 1)] =
        values[size_t(i)] + slopes[size_t(i)] * (knots[size_t(i + 1)] - knots[size_t(i)]);
  }
  return [knots, values, slopes](double t) {
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    size_t i = it == knots.begin() ? 0 : size_t(it - knots.begin() - 1);
    if (i >= slopes.size()) i = slopes.size() - 1;
    return values[i] + slopes[i] * (t - knots[i]);
  };
}

QuadraticFamily make_quadratic_family(const QuadraticFamilySpec& spec) {
  if (spec.S < 1) throw InvalidInput("S must be >= 1");
  if (!(spec.L > 0) || !(spec.mu > 0) || spec.mu > spec.L) {
    throw InvalidInput("need 0 < mu <= L");
  }
  if (!spec.solution) throw InvalidInput("quadratic family needs a solution");
  auto data = std::make_shared<QuadraticFamily>();
  ScaleHierarchy h(spec.lower, spec.upper, spec.S);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Level {
    Matrix H;  // dense, or a column of diagonal entries
    Vector xstar;
    bool diagonal;
  };
  auto levels = std::make_shared<std::vector<Level>>();
  for (int s = 1; s <= spec.S; ++s) {
    Index n = h.points(s);
    Vector eig(n);
    for (Index i = 0; i < n; ++i) eig[i] = spec.mu + (spec.L - spec.mu) * unit(rng);
    eig[0] = spec.L;
    eig[n - 1] = spec.mu;
    std::shuffle(eig.data(), eig.data() + n, rng);
    Level lv;
    lv.diagonal = spec.diagonal;
    if (spec.diagonal) {
      lv.H = eig;
    } else {
      Matrix G(n, n);
      std::normal_distribution<double> normal;
      for (Index i = 0; i < G.size(); ++i) G.data()[i] = normal(rng);
      Eigen::HouseholderQR<Matrix> qr(G);
      Matrix Q = qr.householderQ();
      lv.H = Q * eig.asDiagonal() * Q.transpose();
      lv.H = 0.5 * (lv.H + lv.H.transpose()).eval();
    }
    lv.xstar = sample(spec.solution, h.grid(s)).values;
    data->minimizers.push_back(lv.xstar);
    levels->push_back(std::move(lv));
  }
  data->q = (spec.L - spec.mu) / (spec.L + spec.mu);

  ProblemFamily& f = data->family;
  f.hierarchy = h;
  f.cost_exponent = spec.diagonal ? 1.0 : 2.0;
  double L = spec.L;
  double mu = spec.mu;
  f.make_problem = [levels, L, mu](int s) {
    const Level* lv = &levels->at(size_t(s - 1));
    auto apply = [lv](const Vector& v) -> Vector {
      if (lv->diagonal) return lv->H.col(0).cwiseProduct(v);
      return lv->H * v;
    };
    ProblemAtScale p;
    p.scale = s;
    p.dimension = lv->xstar.size();
    p.objective = [lv, apply](const Vector& x) {
      Vector d = x - lv->xstar;
      return 0.5 * d.dot(apply(d));
    };
    p.gradient = [lv, apply](const Vector& x) -> Vector {
      return apply(x - lv->xstar);
    };
    p.hessian_apply = apply;
    p.smoothness = L;
    p.strong_convexity = mu;
    return p;
  };
  return *data;
}

}  // namespace msopt
