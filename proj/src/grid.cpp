#include "msopt/grid.hpp"

#include <cmath>
#include <string>

#include "msopt/error.hpp"

namespace msopt {

Grid1D::Grid1D(double lower, double upper, Index points)
    : lower_(lower), upper_(upper), points_(points) {
  if (points < 2) throw InvalidInput("grid needs at least 2 points");
  if (!(upper > lower)) throw InvalidInput("grid needs upper > lower");
}

double Grid1D::node(Index i) const {
  if (i < 0 || i >= points_) throw InvalidInput("grid node out of range");
  if (i == points_ - 1) return upper_;
  // Ratio form keeps nodes of nested dyadic grids bitwise equal.
  return lower_ + (upper_ - lower_) * (double(i) / double(points_ - 1));
}

Vector Grid1D::nodes() const {
  Vector t(points_);
  for (Index i = 0; i < points_; ++i) t[i] = node(i);
  return t;
}

ScaleHierarchy::ScaleHierarchy(double lower, double upper, int coarsest_scale)
    : lower_(lower), upper_(upper), coarsest_scale_(coarsest_scale) {
  if (coarsest_scale < 1 || coarsest_scale > 30) {
    throw InvalidInput("coarsest scale must be in 1..30");
  }
  if (!(upper > lower)) throw InvalidInput("hierarchy needs upper > lower");
}

void ScaleHierarchy::check_scale(int scale) const {
  if (scale < 1 || scale > coarsest_scale_) {
    throw InvalidInput("scale " + std::to_string(scale) + " outside 1.." +
                       std::to_string(coarsest_scale_));
  }
}

Index ScaleHierarchy::points(int scale) const {
  check_scale(scale);
  return (Index{1} << (coarsest_scale_ - scale + 1)) + 1;
}

Grid1D ScaleHierarchy::grid(int scale) const {
  return Grid1D(lower_, upper_, points(scale));
}

Index dyadic_points(int coarsest_scale) {
  if (coarsest_scale < 1 || coarsest_scale > 30) {
    throw InvalidInput("coarsest scale must be in 1..30");
  }
  return (Index{1} << coarsest_scale) + 1;
}

std::optional<int> dyadic_level(Index n) {
  if (n < 3) return std::nullopt;
  Index m = n - 1;
  if ((m & (m - 1)) != 0) return std::nullopt;
  int k = 0;
  while (m > 1) {
    m >>= 1;
    ++k;
  }
  return k;
}

SampledFunction::SampledFunction(Grid1D g, Vector v,
                                 std::optional<double> lip)
    : grid(g), values(std::move(v)), lipschitz(lip) {
  if (values.size() != grid.points()) {
    throw InvalidInput("sample count does not match grid");
  }
  if (lipschitz) {
    if (*lipschitz < 0) throw InvalidInput("negative Lipschitz constant");
    double bound = *lipschitz * grid.spacing();
    if (vector_lipschitz(values) > bound * (1 + 1e-12) + 1e-300) {
      throw InvalidInput("samples violate the declared Lipschitz constant");
    }
  }
}

Vector coarsen(const Vector& x) {
  if (x.size() < 2) throw InvalidInput("coarsen needs length >= 2");
  Index n = (x.size() + 1) / 2;
  Vector out(n);
  for (Index i = 0; i < n; ++i) out[i] = x[2 * i];
  return out;
}

Vector interpolate(const Vector& x) {
  if (x.size() < 2) throw InvalidInput("interpolate needs length >= 2");
  Index n = x.size();
  Vector out(2 * n - 1);
  for (Index i = 0; i < n; ++i) out[2 * i] = x[i];
  for (Index i = 0; i + 1 < n; ++i) out[2 * i + 1] = (x[i] + x[i + 1]) / 2;
  return out;
}

Vector free_variables(const Vector& coarse) {
  if (coarse.size() < 2) throw InvalidInput("free_variables needs length >= 2");
  Vector out(coarse.size() - 1);
  for (Index i = 0; i + 1 < coarse.size(); ++i) {
    out[i] = (coarse[i] + coarse[i + 1]) / 2;
  }
  return out;
}

Mask midpoint_mask(Index fine_length) {
  Mask m(static_cast<size_t>(fine_length), false);
  for (Index i = 1; i < fine_length; i += 2) m[size_t(i)] = true;
  return m;
}

double piecewise_eval(const SampledFunction& fs, double t) {
  const Grid1D& g = fs.grid;
  if (!(t >= g.lower() && t <= g.upper())) {
    throw OutOfDomain("evaluation point outside the grid domain");
  }
  Index last = g.points() - 1;
  Index k = static_cast<Index>(std::floor((t - g.lower()) / g.spacing()));
  if (k < 0) k = 0;
  if (k >= last) k = last - 1;
  // Rounding in the cell search can land one cell off.
  while (k > 0 && t < g.node(k)) --k;
  while (k + 1 < last && t > g.node(k + 1)) ++k;
  double t0 = g.node(k);
  double t1 = g.node(k + 1);
  if (t == t0) return fs.values[k];
  if (t == t1) return fs.values[k + 1];
  double w = (t - t0) / (t1 - t0);
  return (1 - w) * fs.values[k] + w * fs.values[k + 1];
}

double vector_lipschitz(const Vector& x) {
  if (x.size() < 2) throw InvalidInput("vector_lipschitz needs length >= 2");
  double m = 0.0;
  for (Index i = 0; i + 1 < x.size(); ++i) {
    m = std::max(m, std::abs(x[i + 1] - x[i]));
  }
  return m;
}

SampledFunction sample(const std::function<double(double)>& f,
                       const Grid1D& grid, double scale_factor) {
  Vector v(grid.points());
  for (Index i = 0; i < grid.points(); ++i) {
    v[i] = f(grid.node(i)) * scale_factor;
  }
  return SampledFunction(grid, std::move(v));
}

DenseTensor coarsen_tensor(const DenseTensor& tensor,
                           const std::set<Index>& modes) {
  DenseTensor out = tensor;
  for (Index mode : modes) {
    if (mode < 0 || mode >= out.order()) {
      throw InvalidInput("coarsen_tensor: mode out of range");
    }
    Index n = out.dim(mode);
    if (n < 3 || n % 2 == 0) {
      throw InvalidInput("coarsen_tensor: mode " + std::to_string(mode + 1) +
                         " must have odd length >= 3");
    }
    out = apply_along_mode(out, mode, (n + 1) / 2,
                           [](std::span<const double> in,
                              std::span<double> o) {
                             for (size_t i = 0; i < o.size(); ++i) {
                               o[i] = in[2 * i];
                             }
                           });
  }
  return out;
}

DenseTensor interpolate_tensor(const DenseTensor& tensor,
                               const std::set<Index>& modes) {
  DenseTensor out = tensor;
  for (Index mode : modes) {
    if (mode < 0 || mode >= out.order()) {
      throw InvalidInput("interpolate_tensor: mode out of range");
    }
    Index n = out.dim(mode);
    if (n < 2) throw InvalidInput("interpolate_tensor: mode length < 2");
    out = apply_along_mode(out, mode, 2 * n - 1,
                           [](std::span<const double> in,
                              std::span<double> o) {
                             size_t m = in.size();
                             for (size_t i = 0; i < m; ++i) o[2 * i] = in[i];
                             for (size_t i = 0; i + 1 < m; ++i) {
                               o[2 * i + 1] = (in[i] + in[i + 1]) / 2;
                             }
                           });
  }
  return out;
}

}  // namespace msopt
