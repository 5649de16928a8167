#pragma once

#include <functional>
#include <optional>
#include <set>

#include "msopt/tensor.hpp"
#include "msopt/types.hpp"

namespace msopt {

/// Uniform grid on [lower, upper] with `points` nodes. Nodes are stored and
/// addressed 0-based here; files and the CLI report them 1-based.
class Grid1D {
 public:
  Grid1D(double lower, double upper, Index points);

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  double width() const noexcept { return upper_ - lower_; }
  Index points() const noexcept { return points_; }
  double spacing() const noexcept { return width() / double(points_ - 1); }

  /// Coordinate of node i (0-based). The last node is exactly `upper`.
  double node(Index i) const;
  Vector nodes() const;

 private:
  double lower_;
  double upper_;
  Index points_;
};

/// Chain of nested dyadic grids. Scale 1 is the finest with 2^S + 1 points,
/// scale S the coarsest with 3.
class ScaleHierarchy {
 public:
  ScaleHierarchy(double lower, double upper, int coarsest_scale);

  int coarsest_scale() const noexcept { return coarsest_scale_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

  /// I_s = 2^(S - s + 1) + 1.
  Index points(int scale) const;
  Grid1D grid(int scale) const;

  /// Number of points on the finest grid.
  Index fine_points() const { return points(1); }

 private:
  void check_scale(int scale) const;

  double lower_;
  double upper_;
  int coarsest_scale_;
};

/// Size of the finest grid in a hierarchy with coarsest scale S.
Index dyadic_points(int coarsest_scale);

/// Returns k when n == 2^k + 1 (k >= 1), otherwise nullopt.
std::optional<int> dyadic_level(Index n);

struct SampledFunction {
  Grid1D grid;
  Vector values;
  std::optional<double> lipschitz;

  /// Validates the length and, when a Lipschitz constant is attached, the
  /// Lipschitz-vector property of the samples.
  SampledFunction(Grid1D grid, Vector values,
                  std::optional<double> lipschitz = std::nullopt);
};

/// Keeps the odd-indexed (1-based) entries: out[i] = x[2i - 1].
Vector coarsen(const Vector& x);

/// Inserts the midpoint between every adjacent pair; length 2I - 1.
Vector interpolate(const Vector& x);

/// The midpoints that `interpolate` inserts; length I - 1.
Vector free_variables(const Vector& coarse);

/// Mask over a fine iterate of length 2I - 1 that is true at inserted
/// midpoints (even 1-based positions).
Mask midpoint_mask(Index fine_length);

/// Secant interpolant through the samples, evaluated at t.
double piecewise_eval(const SampledFunction& fs, double t);

/// Largest adjacent difference max_i |x[i+1] - x[i]|.
double vector_lipschitz(const Vector& x);

SampledFunction sample(const std::function<double(double)>& f,
                       const Grid1D& grid, double scale_factor = 1.0);

/// Dyadic coarsening along each mode in `modes` (ascending order). Every
/// selected mode must have odd length >= 3.
DenseTensor coarsen_tensor(const DenseTensor& tensor,
                           const std::set<Index>& modes);

/// Midpoint interpolation along each mode in `modes` (ascending order).
DenseTensor interpolate_tensor(const DenseTensor& tensor,
                               const std::set<Index>& modes);

}  // namespace msopt
