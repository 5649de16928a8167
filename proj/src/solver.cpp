#include "msopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "msopt/error.hpp"

namespace msopt {

Vector ProblemAtScale::project(const Vector& x) const {
  return constraint ? constraint->project(x) : x;
}

Vector ProblemAtScale::project_conditional(const Vector& x,
                                           const Mask& free) const {
  return constraint ? constraint->project_conditional(x, free) : x;
}

double ProblemAtScale::violation(const Vector& x) const {
  return constraint ? constraint->violation(x) : 0.0;
}

bool StoppingRule::empty() const {
  return !max_iterations && !objective_below && !gradient_norm_below &&
         !objective_within_factor_of && !relative_decrease_below;
}

StoppingRule StoppingRule::iterations(std::int64_t k) {
  StoppingRule r;
  r.max_iterations = k;
  return r;
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::kStep: return "step";
    case Phase::kInterpolate: return "interpolate";
    case Phase::kAllocate: return "allocate";
  }
  return "step";
}

std::int64_t SolveTrace::steps_at_scale(int scale) const {
  std::int64_t n = 0;
  for (const auto& s : scales) {
    if (s.scale == scale) n += s.steps;
  }
  return n;
}

std::int64_t SolveTrace::total_steps() const {
  std::int64_t n = 0;
  for (const auto& s : scales) n += s.steps;
  return n;
}

void SolveTrace::append(const SolveTrace& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  scales.insert(scales.end(), other.scales.begin(), other.scales.end());
  step_ns += other.step_ns;
  interpolate_ns += other.interpolate_ns;
  allocate_ns += other.allocate_ns;
  total_ns += other.total_ns;
}

double condition_rate(double L, double mu) {
  if (!(L > 0) || mu < 0 || mu > L) {
    throw InvalidInput("need L > 0 and 0 <= mu <= L");
  }
  return (L - mu) / (L + mu);
}

double rate_at_stepsize(double alpha, double L, double mu) {
  if (!(alpha > 0)) throw InvalidInput("stepsize must be positive");
  if (!(L > 0) || mu < 0 || mu > L) {
    throw InvalidInput("need L > 0 and 0 <= mu <= L");
  }
  double v = 1.0 - 2.0 * alpha * L * mu / (L + mu);
  return std::sqrt(std::max(v, 0.0));
}

StepRate optimal_stepsize(double L, double mu) {
  if (!(L > 0)) throw InvalidInput("smoothness must be positive");
  if (mu > L) throw InvalidInput("strong convexity exceeds smoothness");
  StepRate r;
  if (!(mu > 0) || mu < 1e-12 * L) {
    r.alpha = 1.0 / L;
    return r;
  }
  r.alpha = 2.0 / (L + mu);
  // Both closed forms agree at this step; keep the larger against rounding.
  r.q = std::max(condition_rate(L, mu), rate_at_stepsize(r.alpha, L, mu));
  return r;
}

namespace {

struct PowerResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

PowerResult power_iterate(const VectorFn& op, Index dim, double rel_tol,
                          int max_iterations) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
  v.normalize();
  PowerResult r;
  double prev = 0.0;
  for (int k = 1; k <= max_iterations; ++k) {
    Vector w = op(v);
    double lambda = v.dot(w);
    double nw = w.norm();
    r.iterations = k;
    r.value = lambda;
    if (!std::isfinite(nw)) throw NumericFailure("power iteration diverged", v);
    if (nw == 0.0) {
      r.converged = true;
      break;
    }
    if (k > 1 && std::abs(lambda - prev) <= rel_tol * std::abs(lambda)) {
      r.converged = true;
      break;
    }
    prev = lambda;
    v = w / nw;
  }
  return r;
}

}  // namespace

SpectralEstimate estimate_constants(const VectorFn& H_full, Index dim,
                                    double rel_tol, int max_iterations,
                                    const VectorFn& restrict_to) {
  if (dim < 1) throw InvalidInput("operator dimension must be positive");
  VectorFn P = restrict_to ? restrict_to : VectorFn([](const Vector& v) { return v; });
  VectorFn H = restrict_to ? VectorFn([&](const Vector& v) { return P(H_full(P(v))); }) : H_full;
  SpectralEstimate est;
  PowerResult top = power_iterate(H, dim, rel_tol, max_iterations);
  est.L = std::max(top.value, 0.0);
  est.iterations = top.iterations;
  if (est.L == 0.0) {
    est.converged = top.converged;
    return est;
  }
  double L = est.L;
  PowerResult shifted = power_iterate(
      [&](const Vector& v) { return P(Vector(L * v - H(v))); }, dim, rel_tol,
      max_iterations);
  est.iterations += shifted.iterations;
  est.converged = top.converged && shifted.converged;
  double mu = L - shifted.value;
  // Differences below the power-iteration resolution are not a usable
  // strong convexity constant.
  if (mu < 10.0 * rel_tol * L) mu = 0.0;
  est.mu = std::min(mu, L);
  return est;
}

Vector pgd_step(const ProblemAtScale& p, const Vector& x, double alpha) {
  if (!(alpha > 0)) throw InvalidInput("stepsize must be positive");
  if (x.size() != p.dimension) throw InvalidInput("iterate dimension mismatch");
  Vector g = p.gradient(x);
  if (!g.allFinite()) {
    throw NumericFailure("non-finite gradient", x, p.scale, 0);
  }
  return p.project(x - alpha * g);
}

UpdateRule pgd_rule(double alpha, std::optional<double> rate) {
  if (!(alpha > 0)) throw InvalidInput("stepsize must be positive");
  UpdateRule u;
  u.name = "pgd";
  u.alpha = alpha;
  u.rate = rate;
  u.step = [alpha](const ProblemAtScale& p, const Vector& x, const Vector& g,
                   const Mask* free) -> Vector {
    Vector y = x - alpha * g;
    if (free) return p.project_conditional(y, *free);
    return p.project(y);
  };
  return u;
}

UpdateRule pgd_rule(const ProblemAtScale& p) {
  StepRate r = optimal_stepsize(p.smoothness, p.strong_convexity);
  return pgd_rule(r.alpha, r.q);
}

RunResult run(const ProblemAtScale& p, const Vector& x0,
              const StoppingRule& rule, const UpdateRule& update,
              const RunOptions& options) {
  if (rule.empty()) throw InvalidInput("stopping rule has no criteria");
  if (x0.size() != p.dimension) throw InvalidInput("x0 dimension mismatch");
  if (!x0.allFinite()) throw InvalidInput("x0 is not finite");
  if (rule.max_iterations && *rule.max_iterations < 0) {
    throw InvalidInput("max_iterations must be >= 0");
  }
  if (!(update.alpha > 0) || !update.step) {
    throw InvalidInput("update rule needs a step and a positive alpha");
  }
  const Mask* free = options.free;
  if (free && static_cast<Index>(free->size()) != p.dimension) {
    throw InvalidInput("mask length does not match problem dimension");
  }
  Index active = p.dimension;
  if (free) active = Index(std::count(free->begin(), free->end(), true));

  auto now_ns = [&] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               Clock::now() - options.origin)
        .count();
  };
  auto start = Clock::now();

  RunResult out;
  out.x = x0;
  if (p.violation(out.x) > 1e-10) {
    out.x = free ? p.project_conditional(out.x, *free) : p.project(out.x);
  }

  std::int64_t stride = std::max<std::int64_t>(options.trace_stride, 1);
  double prev_f = 0.0;
  Vector& x = out.x;
  for (std::int64_t k = 0;; ++k) {
    double f = p.objective(x);
    Vector g = p.gradient(x);
    if (!std::isfinite(f) || !g.allFinite()) {
      throw NumericFailure("non-finite objective or gradient", x, p.scale,
                           int(k));
    }
    if (free) {
      for (Index i = 0; i < g.size(); ++i) {
        if (!(*free)[size_t(i)]) g[i] = 0.0;
      }
    }
    Vector next = update.step(p, x, g, free);
    if (!next.allFinite()) {
      throw NumericFailure("non-finite iterate", x, p.scale, int(k));
    }
    double gm = (x - next).norm() / update.alpha;

    const char* reason = nullptr;
    if (gm == 0.0) reason = "stationary";
    else if (rule.max_iterations && k >= *rule.max_iterations)
      reason = "max_iterations";
    else if (rule.objective_below && f < *rule.objective_below)
      reason = "objective_below";
    else if (rule.objective_within_factor_of &&
             f <= rule.objective_within_factor_of->first *
                      rule.objective_within_factor_of->second)
      reason = "objective_within_factor";
    else if (rule.gradient_norm_below && gm < *rule.gradient_norm_below)
      reason = "gradient_norm_below";
    else if (rule.relative_decrease_below && k > 0 &&
             prev_f - f <= *rule.relative_decrease_below * std::abs(f))
      reason = "relative_decrease";

    if (reason || k % stride == 0) {
      TraceRecord rec;
      rec.scale = p.scale;
      rec.iteration = k;
      rec.objective = f;
      rec.grad_norm = gm;
      rec.t_ns = now_ns();
      rec.phase = Phase::kStep;
      rec.active_dimension = active;
      out.trace.records.push_back(rec);
      if (options.observer) options.observer(k, x);
    }
    if (reason) {
      out.steps = k;
      out.stop_reason = reason;
      break;
    }
    prev_f = f;
    x = std::move(next);
  }

  ScaleSummary sum;
  sum.scale = p.scale;
  sum.steps = out.steps;
  sum.dimension = p.dimension;
  sum.active_dimension = active;
  sum.stop_reason = out.stop_reason;
  out.trace.scales.push_back(sum);
  out.trace.total_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start)
          .count();
  out.trace.step_ns = out.trace.total_ns;
  return out;
}

}  // namespace msopt
