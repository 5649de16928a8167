#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "msopt/types.hpp"

namespace msopt::bounds {

/// Inputs shared by the multiscale error bounds. K holds K_s for
/// s = 1..S (entry s-1).
struct BoundInputs {
  double L_f = 0.0;
  double q = 0.0;
  int S = 1;
  std::vector<std::int64_t> K;
  double width = 1.0;
  double initial_error = 0.0;

  void validate() const;
};

/// |f(l1 a + l2 b) - (l1 f(a) + l2 f(b))| <= 2 L l1 l2 |a - b|.
double lipschitz_interp_bound(double L_f, double lambda1, double lambda2,
                              double dist);

/// L |t - (l1 lower + l2 upper)|, which attains the bound above.
std::function<double(double)> tight_witness(double lambda1, double lambda2,
                                            double lower, double upper,
                                            double L_f);

/// L w / (2 sqrt(I - 1)), I the coarse length.
double exact_interp_bound(double L_f, Index I, double width);

/// sqrt(2) |delta| + L w / (2 sqrt(I - 1)).
double inexact_interp_bound(double L_f, Index I, double width,
                            double delta_norm);

/// L w / (2 sqrt(2^(S-s))) + e_s.
double lazy_interp_bound(double L_f, double width, int S, int s, double e_s);

/// Cumulative counts r_s = K_1 + ... + K_s.
std::vector<std::int64_t> cumulative_counts(const std::vector<std::int64_t>& K);

double greedy_error_bound(const BoundInputs& in);
double lazy_error_bound_general(const BoundInputs& in);
/// Closed form for K_s = K at every scale (uses K[0]).
double lazy_error_bound_constK(const BoundInputs& in);
/// Same quantity as lazy_error_bound_constK by direct summation.
double lazy_error_bound_constK_direct(const BoundInputs& in);

/// sqrt((2/3) dt) |diff|.
double piecewise_distance_bound(double dt, double diff_norm);
/// sqrt((2/15) w dt^2 L^2).
double piecewise_approx_bound(double L_f, double width, double dt);

struct ConnectionThresholds {
  double I_min = 0.0;
  double discrete_err_max = 0.0;
  double C = 0.0;
  double D = 0.0;
};

ConnectionThresholds connection_thresholds(double L_f, double width,
                                           double epsilon);

/// q^K sqrt(2^S + 2).
double expected_pgd_bound(double q, std::int64_t K, int S);
std::int64_t pgd_iterations_needed(double epsilon, double q, int S);

/// Expected greedy bound; here r_s = K_2 + ... + K_s and r_1 = 0.
double expected_greedy_bound(const BoundInputs& in);
std::vector<std::int64_t> expected_greedy_counts(
    const std::vector<std::int64_t>& K);

/// Expected lazy bound for constant K (uses K[0]).
double expected_lazy_bound(const BoundInputs& in);

/// Smallest S for which greedy one-per-coarse beats K fine iterations.
/// Requires q in (0, 1/2).
int greedy_better_min_scales(double q, double L_f, double width);

/// Minimum K for which the lazy threshold exists.
double lazy_better_min_iterations(double q);

/// Smallest S for which lazy with K' = ceil(4K/5) - 1 beats K fine
/// iterations. Throws Inapplicable when K is too small.
int lazy_better_min_scales(double q, std::int64_t K, double L_f, double width);

}  // namespace msopt::bounds
