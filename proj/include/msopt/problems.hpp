#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "msopt/multiscale.hpp"

namespace msopt {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Normalized Legendre polynomial sqrt((2m+1)/2) P_m(t).
double legendre_value(int m, double t);
/// Binomial-sum and three-term-recurrence forms (both normalized).
double legendre_binomial(int m, double t);
double legendre_recurrence(int m, double t);

/// Quartic used as the default ground-truth density on [-1, 1].
double default_density(double t);

struct LegendreProblemSpec {
  int M = 5;
  /// Row m of A_1 holds degree first_degree + m.
  int first_degree = 1;
  int S = 10;
  double lambda = 1e-4;
  double noise_level = 0.05;
  std::uint64_t seed = 0;
  /// Ground-truth density on [-1, 1]; clipped at zero and renormalized.
  std::function<double(double)> density = default_density;

  void validate() const;
};

struct MeasurementData {
  Vector y;
  Vector clean;
  Vector x_true;  // fine-scale samples p(t) dt, summing to 1
  Matrix operator_fine;       // A_1, M x I_1
  SparseMatrix laplacian_fine;  // G_1
};

/// Tridiagonal [1,-1; -1,2,-1; ...; -1,1] times `prefactor`.
SparseMatrix path_laplacian(Index n, double prefactor);

/// A_1 and G_1 (y, clean and x_true left empty).
MeasurementData build_fine_operators(const LegendreProblemSpec& spec);

struct ScaledOperators {
  Matrix A;
  SparseMatrix G;
};

ScaledOperators scale_operators(const Matrix& A1, const SparseMatrix& G1,
                                int s);

/// Full data set: operators, ground truth and noisy measurements.
MeasurementData generate_measurements(const LegendreProblemSpec& spec);

/// Seed-independent per-scale operators and spectral constants.
struct LegendreOperators {
  LegendreProblemSpec spec;
  ScaleHierarchy hierarchy{-1.0, 1.0, 1};
  std::vector<ScaledOperators> per_scale;  // entry s-1
  std::vector<SpectralEstimate> constants;  // entry s-1

  static std::shared_ptr<const LegendreOperators> build(
      const LegendreProblemSpec& spec);
};

/// Problem family for a measurement vector y over shared operators.
ProblemFamily make_family(std::shared_ptr<const LegendreOperators> ops,
                          const Vector& y);
ProblemFamily make_family(const LegendreProblemSpec& spec);

/// Single-scale problem at scale s (the family's generator).
ProblemAtScale legendre_problem(const LegendreOperators& ops, const Vector& y,
                                int s);

/// I.i.d. standard normal vector.
Vector gaussian_vector(Index n, std::uint64_t seed);

struct ReferenceSolution {
  Vector x;
  double objective = 0.0;
  std::int64_t iterations = 0;
  double grad_norm = 0.0;
};

/// High-accuracy minimizer by restarted accelerated projected gradient,
/// used only as the reference optimum for relative stopping rules.
ReferenceSolution reference_optimum(const ProblemAtScale& p, const Vector& x0,
                                    double tol = 1e-12,
                                    std::int64_t max_iterations = 1000000);

/// Strongly convex quadratics 0.5 (x - x_s*)' H_s (x - x_s*) whose
/// minimizers sample a Lipschitz function on [lower, upper].
struct QuadraticFamilySpec {
  int S = 4;
  double lower = 0.0;
  double upper = 1.0;
  double L = 1.0;   // largest Hessian eigenvalue
  double mu = 0.5;  // smallest Hessian eigenvalue
  bool diagonal = true;
  std::uint64_t seed = 0;
  std::function<double(double)> solution;  // f*
  double solution_lipschitz = 0.0;
};

struct QuadraticFamily {
  ProblemFamily family;
  std::vector<Vector> minimizers;  // entry s-1
  double q = 0.0;
};

QuadraticFamily make_quadratic_family(const QuadraticFamilySpec& spec);

/// Random piecewise-linear function with Lipschitz constant exactly L
/// (slopes in [-L, L] with at least one of magnitude L).
std::function<double(double)> random_lipschitz_function(double lower,
                                                        double upper, double L,
                                                        int pieces,
                                                        std::uint64_t seed);

}  // namespace msopt
