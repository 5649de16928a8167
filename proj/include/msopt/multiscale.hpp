#pragma once

#include <functional>
#include <vector>

#include "msopt/grid.hpp"
#include "msopt/solver.hpp"

namespace msopt {

/// Scale-indexed generator of discretized problems.
struct ProblemFamily {
  ScaleHierarchy hierarchy{-1.0, 1.0, 1};
  std::function<ProblemAtScale(int scale)> make_problem;
  /// Maps an iterate at scale s+1 to scale s; defaults to `interpolate`.
  std::function<Vector(const Vector&, int scale)> interpolate_iterate;
  double cost_exponent = 1.0;  // per-iteration cost grows like I_s^p
};

/// Stopping rules per scale; entry s-1 holds scale s.
struct IterationPlan {
  std::vector<StoppingRule> per_scale;

  int scales() const { return int(per_scale.size()); }
  const StoppingRule& at(int scale) const;
  StoppingRule& at(int scale);

  /// Fixed iteration counts K_s (index s-1). Throws if any entry has no
  /// max_iterations.
  std::vector<std::int64_t> iteration_counts() const;

  static IterationPlan fixed(const std::vector<std::int64_t>& K);
  static IterationPlan uniform(int S, std::int64_t K);
};

enum class GreedyVariant { kUniform, kOnePerCoarse };

/// Cheaper-than-single-scale plans for a K-iteration fine budget.
IterationPlan greedy_plan(std::int64_t K, GreedyVariant variant, int S);
IterationPlan lazy_plan(std::int64_t K, int S);

struct CostModel {
  double p = 1.0;  // per-iteration cost exponent
  double A = 1.0;  // cost of one fine-scale iteration
};

/// K indexed by scale (entry s-1).
double greedy_cost_bound(const std::vector<std::int64_t>& K,
                         const CostModel& model);
double lazy_cost_bound(const std::vector<std::int64_t>& K,
                       const CostModel& model);

struct MeasuredCost {
  double units = 0.0;  // fine-iteration equivalents
  double interpolate_fraction = 0.0;
  double allocate_fraction = 0.0;
};

/// Sum over steps of (active dimension / fine dimension)^p, plus the share
/// of wall time spent interpolating and allocating.
MeasuredCost measured_cost(const SolveTrace& trace, double p,
                           Index fine_dimension);

/// Picks which coordinates are free at scale s of an S-scale run.
using MaskPolicy = std::function<Mask(int scale, int S, Index dimension)>;

MaskPolicy all_free_policy();
MaskPolicy midpoint_policy();

struct MultiscaleOptions {
  Clock::time_point origin = Clock::now();
  std::int64_t trace_stride = 1;
  /// Optional override of the update rule per scale.
  std::function<UpdateRule(const ProblemAtScale&)> update;
  std::function<void(int, std::int64_t, const Vector&)> observer;
};

struct MultiscaleResult {
  Vector x;
  SolveTrace trace;
};

MultiscaleResult multiscale_solve(const ProblemFamily& family,
                                  const IterationPlan& plan,
                                  const Vector& init, const MaskPolicy& masks,
                                  const MultiscaleOptions& options = {});

MultiscaleResult greedy_solve(const ProblemFamily& family,
                              const IterationPlan& plan, const Vector& init,
                              const MultiscaleOptions& options = {});

MultiscaleResult lazy_solve(const ProblemFamily& family,
                            const IterationPlan& plan, const Vector& init,
                            const MultiscaleOptions& options = {});

}  // namespace msopt
