#include "msopt/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/SVD>

#include "msopt/error.hpp"

namespace msopt {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

// Projection of the entries listed in idx onto {y >= 0, sum = c}; c <= 0
// collapses them to zero (the only feasible point when c == 0).
void project_indexed(Vector& y, const std::vector<Index>& idx, double c) {
  if (idx.empty()) return;
  if (c <= 0) {
    for (Index i : idx) y[i] = 0.0;
    return;
  }
  std::vector<double> buf(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) buf[k] = y[idx[k]];
  project_simplex_inplace(buf.data(), Index(buf.size()), c);
  for (size_t k = 0; k < idx.size(); ++k) y[idx[k]] = buf[k];
}

}  // namespace

void project_simplex_inplace(double* data, Index n, double c) {
  if (!(c > 0)) throw InvalidInput("simplex target must be positive");
  if (n < 1) throw InvalidInput("simplex projection of an empty vector");
  double xmax = -INFINITY;
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(data[i])) {
      throw InvalidInput("simplex projection of a non-finite vector");
    }
    xmax = std::max(xmax, data[i]);
    total += data[i];
  }
  // The threshold is at least both of these, so only larger entries can
  // stay positive.
  double lower = std::max(xmax - c, (total - c) / double(n));
  std::vector<double> cand;
  cand.reserve(size_t(std::min<Index>(n, 4096)));
  for (Index i = 0; i < n; ++i) {
    if (data[i] >= lower) cand.push_back(data[i]);
  }
  // Michelot's pivoting: the running threshold only increases, so entries
  // dropped once never come back.
  double tau = 0.0;
  for (;;) {
    double sum = 0.0;
    for (double v : cand) sum += v;
    tau = (sum - c) / double(cand.size());
    size_t kept = 0;
    for (double v : cand) {
      if (v > tau) cand[kept++] = v;
    }
    if (kept == cand.size()) break;
    cand.resize(kept);
  }
  for (Index i = 0; i < n; ++i) data[i] = std::max(data[i] - tau, 0.0);
}

Vector project_nonneg(const Vector& x) { return x.cwiseMax(0.0); }

Vector project_scaled_simplex(const Vector& x, double c) {
  if (!(c > 0)) throw InvalidInput("simplex target must be positive");
  Vector y = x;
  project_simplex_inplace(y.data(), y.size(), c);
  return y;
}

Matrix project_row_simplex(const Matrix& A) {
  if (A.cols() < 1) throw InvalidInput("row simplex needs at least 1 column");
  RowMatrix R = A;
  for (Index i = 0; i < R.rows(); ++i) {
    project_simplex_inplace(R.row(i).data(), R.cols(), 1.0);
  }
  return R;
}

Matrix pseudo_inverse(const Matrix& A, double rel_cutoff) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  double cut = sv.size() ? rel_cutoff * sv[0] : 0.0;
  Vector inv(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    inv[i] = sv[i] > cut ? 1.0 / sv[i] : 0.0;
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector project_affine(const Vector& x, const Matrix& A, const Vector& b) {
  if (A.cols() != x.size() || A.rows() != b.size()) {
    throw InvalidInput("affine projection: shape mismatch");
  }
  return x - pseudo_inverse(A) * (A * x - b);
}

ConstraintSet::ConstraintSet(Kind kind) : kind_(std::move(kind)) {
  std::visit(Overload{
                 [](const Nonneg&) {},
                 [](const ScaledSimplex& s) {
                   if (!(s.target > 0)) {
                     throw InvalidInput("simplex target must be positive");
                   }
                 },
                 [](const RowSimplex& r) {
                   if (r.rows < 1 || r.cols < 1) {
                     throw InvalidInput("row simplex needs positive shape");
                   }
                 },
                 [this](const AffineLinear& a) {
                   if (a.A.rows() != a.b.size()) {
                     throw InvalidInput("affine constraint shape mismatch");
                   }
                   pinv_ = pseudo_inverse(a.A);
                 },
             },
             kind_);
}

ConstraintSet ConstraintSet::scaled_simplex(double target) {
  return {ScaledSimplex{target}};
}

ConstraintSet ConstraintSet::row_simplex(Index rows, Index cols) {
  return {RowSimplex{rows, cols}};
}

ConstraintSet ConstraintSet::affine(Matrix A, Vector b) {
  return {AffineLinear{std::move(A), std::move(b)}};
}

Vector ConstraintSet::project(const Vector& x) const {
  return std::visit(
      Overload{
          [&](const Nonneg&) { return project_nonneg(x); },
          [&](const ScaledSimplex& s) {
            return project_scaled_simplex(x, s.target);
          },
          [&](const RowSimplex& r) {
            if (x.size() != r.rows * r.cols) {
              throw InvalidInput("row simplex: size mismatch");
            }
            Vector y = x;
            for (Index i = 0; i < r.rows; ++i) {
              project_simplex_inplace(y.data() + i * r.cols, r.cols, 1.0);
            }
            return y;
          },
          [&](const AffineLinear& a) -> Vector {
            if (x.size() != a.A.cols()) {
              throw InvalidInput("affine projection: shape mismatch");
            }
            return x - pinv_ * (a.A * x - a.b);
          },
      },
      kind_);
}

double ConstraintSet::violation(const Vector& x) const {
  return std::visit(
      Overload{
          [&](const Nonneg&) { return std::max(0.0, -x.minCoeff()); },
          [&](const ScaledSimplex& s) {
            return std::max(std::max(0.0, -x.minCoeff()),
                            std::abs(x.sum() - s.target));
          },
          [&](const RowSimplex& r) {
            double v = std::max(0.0, -x.minCoeff());
            for (Index i = 0; i < r.rows; ++i) {
              v = std::max(v, std::abs(x.segment(i * r.cols, r.cols).sum() -
                                       1.0));
            }
            return v;
          },
          [&](const AffineLinear& a) {
            return (a.A * x - a.b).cwiseAbs().maxCoeff();
          },
      },
      kind_);
}

Vector ConstraintSet::project_conditional(const Vector& x,
                                          const Mask& free) const {
  if (static_cast<Index>(free.size()) != x.size()) {
    throw InvalidInput("mask length does not match iterate");
  }
  bool all_free = std::all_of(free.begin(), free.end(), [](bool b) { return b; });
  if (all_free) return project(x);

  Vector y = x;
  std::visit(
      Overload{
          [&](const Nonneg&) {
            for (Index i = 0; i < x.size(); ++i) {
              if (free[size_t(i)]) y[i] = std::max(y[i], 0.0);
            }
          },
          [&](const ScaledSimplex& s) {
            std::vector<Index> idx;
            double frozen = 0.0;
            for (Index i = 0; i < x.size(); ++i) {
              if (free[size_t(i)]) idx.push_back(i);
              else frozen += x[i];
            }
            project_indexed(y, idx, s.target - frozen);
          },
          [&](const RowSimplex& r) {
            for (Index row = 0; row < r.rows; ++row) {
              std::vector<Index> idx;
              double frozen = 0.0;
              for (Index j = 0; j < r.cols; ++j) {
                Index i = row * r.cols + j;
                if (free[size_t(i)]) idx.push_back(i);
                else frozen += x[i];
              }
              project_indexed(y, idx, 1.0 - frozen);
            }
          },
          [&](const AffineLinear& a) {
            std::vector<Index> idx;
            Vector rhs = a.b;
            for (Index i = 0; i < x.size(); ++i) {
              if (free[size_t(i)]) idx.push_back(i);
              else rhs -= a.A.col(i) * x[i];
            }
            if (idx.empty()) return;
            Matrix Af(a.A.rows(), Index(idx.size()));
            Vector xf(Index(idx.size()));
            for (size_t k = 0; k < idx.size(); ++k) {
              Af.col(Index(k)) = a.A.col(idx[k]);
              xf[Index(k)] = x[idx[k]];
            }
            Vector yf = project_affine(xf, Af, rhs);
            for (size_t k = 0; k < idx.size(); ++k) y[idx[k]] = yf[Index(k)];
          },
      },
      kind_);
  return y;
}

double rescale_pnorm_target(double c, double p, Index I_s, Index I_1) {
  if (p < 1) throw InvalidInput("p must be >= 1");
  if (I_s < 2 || I_1 < 2 || I_s > I_1) {
    throw InvalidInput("rescale_pnorm_target: need 2 <= I_s <= I_1");
  }
  return c * std::pow(double(I_s) / double(I_1), 1.0 / p);
}

RescaledTarget l1_rescale_with_bound(double b, Index I, double L_f,
                                     double u_minus_l) {
  Vector bv(1);
  bv[0] = b;
  return linear_rescale_with_bound(bv, I, L_f, u_minus_l);
}

RescaledTarget linear_rescale_with_bound(const Vector& b, Index I,
                                         double L_fg_max, double u_minus_l) {
  if (I < 2) throw InvalidInput("rescale needs I >= 2");
  if (L_fg_max < 0 || u_minus_l <= 0) {
    throw InvalidInput("rescale needs L >= 0 and a positive width");
  }
  RescaledTarget out;
  double rootK = std::sqrt(double(b.size()));
  if (I % 2 == 0) {
    out.target = b / 2;
    out.slack_bound =
        rootK * 0.25 * L_fg_max * u_minus_l * double(I) / double(I - 1);
  } else {
    out.target = (double(I + 1) / double(I)) * (b / 2);
    out.slack_bound = rootK * 0.5 * L_fg_max * u_minus_l;
  }
  return out;
}

Matrix subsample_columns(const Matrix& A) {
  if (A.cols() < 2) throw InvalidInput("subsample_columns needs >= 2 columns");
  Index n = (A.cols() + 1) / 2;
  Matrix out(A.rows(), n);
  for (Index j = 0; j < n; ++j) out.col(j) = A.col(2 * j);
  return out;
}

double product_lipschitz(double L_f, double L_g, double f_sup, double g_sup) {
  if (L_f < 0 || L_g < 0 || f_sup < 0 || g_sup < 0) {
    throw InvalidInput("product_lipschitz inputs must be nonnegative");
  }
  return L_f * g_sup + L_g * f_sup;
}

}  // namespace msopt
