#pragma once

#include <variant>

#include "msopt/types.hpp"

namespace msopt {

struct Nonneg {};

struct ScaledSimplex {
  double target = 1.0;
};

/// Each row of a matrix (stored row-major in the flat vector) lies on the
/// unit simplex.
struct RowSimplex {
  Index rows = 0;
  Index cols = 0;
};

struct AffineLinear {
  Matrix A;  // K x I
  Vector b;  // K
};

/// One of the supported feasible sets.
class ConstraintSet {
 public:
  using Kind = std::variant<Nonneg, ScaledSimplex, RowSimplex, AffineLinear>;

  ConstraintSet(Kind kind);  // NOLINT(google-explicit-constructor)

  static ConstraintSet nonneg() { return {Nonneg{}}; }
  static ConstraintSet scaled_simplex(double target);
  static ConstraintSet row_simplex(Index rows, Index cols);
  static ConstraintSet affine(Matrix A, Vector b);

  const Kind& kind() const noexcept { return kind_; }

  Vector project(const Vector& x) const;

  /// Largest violation of the constraint (sign and equality parts).
  double violation(const Vector& x) const;

  /// Projection of the free coordinates with the others held fixed.
  /// Only the masked entries of the result differ from x.
  Vector project_conditional(const Vector& x, const Mask& free) const;

 private:
  Kind kind_;
  Matrix pinv_;  // cached pseudo-inverse for the affine case
};

Vector project_nonneg(const Vector& x);

/// Euclidean projection onto {y >= 0, sum(y) = c}.
Vector project_scaled_simplex(const Vector& x, double c);

/// Projects each row of an I x R matrix onto the unit simplex.
Matrix project_row_simplex(const Matrix& A);

/// In-place simplex projection of a contiguous block; used for large
/// tensor slices.
void project_simplex_inplace(double* data, Index n, double c);

Vector project_affine(const Vector& x, const Matrix& A, const Vector& b);

/// Threshold-cutoff pseudo-inverse (relative cutoff on singular values).
Matrix pseudo_inverse(const Matrix& A, double rel_cutoff = 1e-12);

/// c * (I_s / I_1)^(1/p).
double rescale_pnorm_target(double c, double p, Index I_s, Index I_1);

struct RescaledTarget {
  Vector target;
  double slack_bound = 0.0;

  double scalar() const { return target[0]; }
};

/// Coarse-scale target and slack for an l1 constraint sum(x) = b with x
/// sampled from an L_f-Lipschitz function.
RescaledTarget l1_rescale_with_bound(double b, Index I, double L_f,
                                     double u_minus_l);

/// Coarse-scale target and slack for A x = b where each row of A times x
/// samples an L_fg-Lipschitz product.
RescaledTarget linear_rescale_with_bound(const Vector& b, Index I,
                                         double L_fg_max, double u_minus_l);

/// Keeps the odd (1-based) columns of A.
Matrix subsample_columns(const Matrix& A);

/// Lipschitz constant of a product f * g on a bounded domain.
double product_lipschitz(double L_f, double L_g, double f_sup, double g_sup);

}  // namespace msopt
