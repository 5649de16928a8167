#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "msopt/solver.hpp"
#include "msopt/tensor.hpp"

namespace msopt::tucker {

/// Y[i, k...] = sum_r A[i, r] B[r, k...].
DenseTensor mode1_product(const DenseTensor& B, const Matrix& A);

/// Mixing matrix A (I x R, rows on the simplex) and core B (R x ...).
struct Factors {
  Matrix A;
  DenseTensor B;
};

/// Sum-normalization of the core: every slice indexed by the first
/// `leading_modes` modes of B sums to `target`. leading_modes = 1 gives
/// one slice per component, 2 one per (component, first data mode).
struct CoreConstraint {
  Index leading_modes = 1;
  double target = 1.0;
};

void project_core(DenseTensor& B, const CoreConstraint& c);
double core_violation(const DenseTensor& B, const CoreConstraint& c);
double mixing_violation(const Matrix& A);

double objective(const DenseTensor& Y, const Factors& f);
/// Block gradients of objective(): (A B - Y) B' and A' (A B - Y), with B
/// and Y unfolded along the first mode.
Matrix gradient_a(const DenseTensor& Y, const Factors& f);
DenseTensor gradient_b(const DenseTensor& Y, const Factors& f);
double rel_error(const DenseTensor& Y, const Factors& f);
/// Mean of |model - Y| / Y over entries with Y > floor.
double mean_rel_error(const DenseTensor& Y, const Factors& f, double floor);

struct Options {
  std::optional<double> rel_error_tol;
  std::optional<double> mean_rel_error_tol;
  std::optional<double> objective_tol;
  std::int64_t max_iterations = 500;
  /// Entries at or below this are left out of the mean relative error;
  /// unset means 1e-8 * max(Y).
  std::optional<double> mre_floor;
  Index core_leading_modes = 1;
  double core_target = 1.0;  // slice sum at the finest scale
  std::uint64_t seed = 0;
  bool record_descent = true;
  /// Update the core one rank-slice B[r] at a time, each with its own
  /// Lipschitz constant (AᵀA)_rr.
  bool subblock_updates = false;
};

struct DescentRecord {
  double before = 0.0;   // f(A^t, B^t)
  double after_a = 0.0;  // f(A^{t+1}, B^t)
  double after_b = 0.0;  // f(A^{t+1}, B^{t+1})
};

struct Result {
  Factors factors;
  SolveTrace trace;
  std::int64_t iterations = 0;
  std::string stop_reason;
  double final_rel_error = 0.0;
  double final_mean_rel_error = 0.0;
  double final_objective = 0.0;
  std::vector<DescentRecord> descent;
  double max_violation = 0.0;  // over all iterates
  int reinitializations = 0;
};

/// Seeded random factors: A uniform then projected, B uniform then scaled
/// onto its slice sums.
Factors random_factors(const std::vector<Index>& Y_dims, Index R,
                       const CoreConstraint& core, std::uint64_t seed);

/// Alternating projected gradient steps on A then B with 1/L steps.
Result bcd_factorize(const DenseTensor& Y, Index R, const Options& opts,
                     std::optional<Factors> init = std::nullopt,
                     int scale = 1,
                     Clock::time_point origin = Clock::now());

/// Coarse-to-fine factorization along `continuous_dims` (0-based modes of
/// Y, never mode 0). Every continuous mode must have length 2^k + 1 with
/// the same k. `coarse_opts` applies at scales s > 1.
Result multiscale_factorize(const DenseTensor& Y, Index R,
                            const std::set<Index>& continuous_dims,
                            const Options& opts,
                            std::optional<Options> coarse_opts = std::nullopt,
                            Clock::time_point origin = Clock::now());

/// Column permutation of `A` best matching `A_true` in column-wise l1
/// distance (Hungarian method). perm[j] is the column of A matched to
/// column j of A_true.
std::vector<Index> align_columns(const Matrix& A, const Matrix& A_true);
/// Max absolute entry error after alignment.
double aligned_max_error(const Matrix& A, const Matrix& A_true);

/// Minimum-cost perfect matching on a square cost matrix.
std::vector<Index> hungarian(const Matrix& cost);

struct MixtureSpec {
  double lower = -10.0;
  double upper = 10.0;
  Index points = 65;
};

struct Mixture {
  DenseTensor Y;
  Matrix A_true;
  DenseTensor sources;  // R x K x K x K, slices summing to 1
};

/// Five mixtures of three product densities on a cubic grid.
Mixture synth_mixtures(const MixtureSpec& spec = {});

struct GeoshapeSpec {
  Index I = 20;
  Index J = 7;
  Index K = 1025;
  Index R = 3;
  double noise = 0.1;  // multiplicative
  std::uint64_t seed = 0;
};

struct Geoshape {
  DenseTensor Y;
  Matrix A_true;
  DenseTensor B_true;
};

/// Shape-matched stand-in for the depth-fibre data: fibres Y[i, j, :] are
/// nonnegative and sum to one.
Geoshape geoshape_synthetic(const GeoshapeSpec& spec = {});

/// Binary ("MSOT1" header) or CSV ("i1,...,iN,value", 1-based).
DenseTensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const DenseTensor& T);

}  // namespace msopt::tucker
