#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msopt/constraints.hpp"
#include "msopt/types.hpp"

namespace msopt {

using Clock = std::chrono::steady_clock;
using VectorFn = std::function<Vector(const Vector&)>;

/// One discretized problem: objective, gradient, feasible set and the
/// smoothness / strong convexity constants of the objective.
struct ProblemAtScale {
  int scale = 1;
  Index dimension = 0;
  std::function<double(const Vector&)> objective;
  VectorFn gradient;
  std::optional<ConstraintSet> constraint;  // unset means unconstrained
  double smoothness = 1.0;
  double strong_convexity = 0.0;
  VectorFn hessian_apply;  // optional; for quadratic objectives

  Vector project(const Vector& x) const;
  Vector project_conditional(const Vector& x, const Mask& free) const;
  double violation(const Vector& x) const;
};

/// Stops at the first criterion that fires. Unset criteria never fire.
struct StoppingRule {
  std::optional<std::int64_t> max_iterations;
  std::optional<double> objective_below;
  std::optional<double> gradient_norm_below;
  /// (factor, reference): stop once objective <= factor * reference.
  std::optional<std::pair<double, double>> objective_within_factor_of;
  /// Stop once (f_{k-1} - f_k) <= tol * |f_k|, after at least one step.
  std::optional<double> relative_decrease_below;

  bool empty() const;

  static StoppingRule iterations(std::int64_t k);
};

enum class Phase { kStep, kInterpolate, kAllocate };

const char* to_string(Phase phase);

struct TraceRecord {
  int scale = 1;
  std::int64_t iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;  // norm of the gradient mapping
  std::int64_t t_ns = 0;
  Phase phase = Phase::kStep;
  Index active_dimension = 0;  // coordinates the step was allowed to change
};

struct ScaleSummary {
  int scale = 1;
  std::int64_t steps = 0;
  Index dimension = 0;
  Index active_dimension = 0;
  std::string stop_reason;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  std::vector<ScaleSummary> scales;
  std::int64_t step_ns = 0;
  std::int64_t interpolate_ns = 0;
  std::int64_t allocate_ns = 0;
  std::int64_t total_ns = 0;

  std::int64_t steps_at_scale(int scale) const;
  std::int64_t total_steps() const;
  void append(const SolveTrace& other);
};

struct StepRate {
  double alpha = 0.0;
  std::optional<double> q;  // unset when the problem is not strongly convex
};

/// Step 2/(L+mu) with rate (c-1)/(c+1); falls back to 1/L without a rate
/// when mu is zero or below 1e-12 L.
StepRate optimal_stepsize(double L, double mu);

/// Contraction factor of the projected step with size alpha.
double rate_at_stepsize(double alpha, double L, double mu);

/// (L - mu)/(L + mu).
double condition_rate(double L, double mu);

struct SpectralEstimate {
  double L = 0.0;
  double mu = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Power iteration for the largest eigenvalue of a symmetric PSD operator
/// and shifted power iteration for the smallest. With `restrict_to` (an
/// orthogonal projector) both are taken over its range.
SpectralEstimate estimate_constants(const VectorFn& H, Index dim,
                                    double rel_tol = 1e-8,
                                    int max_iterations = 10000,
                                    const VectorFn& restrict_to = {});

/// Pluggable update rule. `step` maps (problem, x, gradient, free mask) to
/// a new iterate; with a mask only the free coordinates may change. `alpha`
/// scales the gradient mapping used for stopping.
struct UpdateRule {
  std::string name;
  double alpha = 0.0;
  std::optional<double> rate;
  std::function<Vector(const ProblemAtScale&, const Vector&, const Vector&,
                       const Mask*)>
      step;
};

/// Projected gradient step with the constants of `p`.
UpdateRule pgd_rule(const ProblemAtScale& p);
UpdateRule pgd_rule(double alpha, std::optional<double> rate = std::nullopt);

Vector pgd_step(const ProblemAtScale& p, const Vector& x, double alpha);

struct RunOptions {
  const Mask* free = nullptr;  // lazy updates; null means all free
  Clock::time_point origin = Clock::now();
  std::int64_t trace_stride = 1;  // record every n-th iterate (plus last)
  /// Called with (iteration, iterate) at every recorded iterate.
  std::function<void(std::int64_t, const Vector&)> observer;
};

struct RunResult {
  Vector x;
  SolveTrace trace;
  std::int64_t steps = 0;
  std::string stop_reason;
};

RunResult run(const ProblemAtScale& p, const Vector& x0,
              const StoppingRule& rule, const UpdateRule& update,
              const RunOptions& options = {});

}  // namespace msopt
