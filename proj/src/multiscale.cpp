#include "msopt/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msopt/error.hpp"

namespace msopt {

const StoppingRule& IterationPlan::at(int scale) const {
  if (scale < 1 || scale > scales()) throw InvalidInput("plan scale out of range");
  return per_scale[size_t(scale - 1)];
}

StoppingRule& IterationPlan::at(int scale) {
  if (scale < 1 || scale > scales()) throw InvalidInput("plan scale out of range");
  return per_scale[size_t(scale - 1)];
}

std::vector<std::int64_t> IterationPlan::iteration_counts() const {
  std::vector<std::int64_t> K;
  for (const auto& r : per_scale) {
    if (!r.max_iterations) throw InvalidInput("plan entry has no iteration count");
    K.push_back(*r.max_iterations);
  }
  return K;
}

IterationPlan IterationPlan::fixed(const std::vector<std::int64_t>& K) {
  IterationPlan plan;
  for (auto k : K) {
    if (k < 0) throw InvalidInput("iteration counts must be >= 0");
    plan.per_scale.push_back(StoppingRule::iterations(k));
  }
  return plan;
}

IterationPlan IterationPlan::uniform(int S, std::int64_t K) {
  if (S < 1) throw InvalidInput("need at least one scale");
  return fixed(std::vector<std::int64_t>(size_t(S), K));
}

IterationPlan greedy_plan(std::int64_t K, GreedyVariant variant, int S) {
  if (K < 3) throw InvalidInput("greedy plans need K >= 3");
  if (S < 1) throw InvalidInput("need at least one scale");
  std::vector<std::int64_t> Ks(static_cast<size_t>(S));
  if (variant == GreedyVariant::kUniform) {
    std::int64_t k = (2 * K + 4) / 5 - 1;  // ceil(2K/5) - 1
    std::fill(Ks.begin(), Ks.end(), k);
  } else {
    std::fill(Ks.begin(), Ks.end(), 1);
    Ks[0] = K - 2;
  }
  return IterationPlan::fixed(Ks);
}

IterationPlan lazy_plan(std::int64_t K, int S) {
  if (K < 2) throw InvalidInput("lazy plans need K >= 2");
  return IterationPlan::uniform(S, (4 * K + 4) / 5 - 1);  // ceil(4K/5) - 1
}

namespace {

void check_model(const CostModel& m) {
  if (m.p < 1 || !(m.A > 0)) throw InvalidInput("cost model needs p >= 1, A > 0");
}

}  // namespace

double greedy_cost_bound(const std::vector<std::int64_t>& K,
                         const CostModel& model) {
  check_model(model);
  double total = 0.0;
  for (size_t s = 0; s < K.size(); ++s) {
    total += double(K[s]) * std::pow(0.6, double(s));
  }
  return model.A * total;
}

double lazy_cost_bound(const std::vector<std::int64_t>& K,
                       const CostModel& model) {
  check_model(model);
  if (K.empty()) return 0.0;
  int S = int(K.size());
  if (S == 1) return model.A * double(K[0]);
  double total = 0.0;
  for (int s = 1; s < S; ++s) total += std::ldexp(double(K[size_t(s - 1)]), -s);
  total += 3.0 * std::ldexp(double(K[size_t(S - 1)]), -S);
  return model.A * total;
}

MeasuredCost measured_cost(const SolveTrace& trace, double p,
                           Index fine_dimension) {
  if (fine_dimension < 1) throw InvalidInput("fine dimension must be positive");
  MeasuredCost c;
  for (const auto& s : trace.scales) {
    double ratio = double(s.active_dimension) / double(fine_dimension);
    c.units += double(s.steps) * std::pow(ratio, p);
  }
  if (trace.total_ns > 0) {
    c.interpolate_fraction =
        std::clamp(double(trace.interpolate_ns) / double(trace.total_ns), 0.0, 1.0);
    c.allocate_fraction =
        std::clamp(double(trace.allocate_ns) / double(trace.total_ns), 0.0, 1.0);
  }
  return c;
}

MaskPolicy all_free_policy() {
  return [](int, int, Index n) { return Mask(size_t(n), true); };
}

MaskPolicy midpoint_policy() {
  return [](int s, int S, Index n) {
    if (s == S) return Mask(size_t(n), true);
    return midpoint_mask(n);
  };
}

MultiscaleResult multiscale_solve(const ProblemFamily& family,
                                  const IterationPlan& plan,
                                  const Vector& init, const MaskPolicy& masks,
                                  const MultiscaleOptions& options) {
  const int S = family.hierarchy.coarsest_scale();
  if (plan.scales() != S) {
    throw InvalidInput("plan has " + std::to_string(plan.scales()) +
                       " scales, hierarchy has " + std::to_string(S));
  }
  if (!family.make_problem) throw InvalidInput("family has no problem generator");
  auto start = Clock::now();
  auto elapsed = [](Clock::time_point a) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - a)
        .count();
  };
  auto since_origin = [&] { return elapsed(options.origin); };

  MultiscaleResult out;
  auto t0 = Clock::now();
  ProblemAtScale p = family.make_problem(S);
  out.trace.allocate_ns += elapsed(t0);
  if (init.size() != p.dimension) {
    throw InvalidInput("init dimension does not match the coarsest scale");
  }
  Vector x = init;
  if (p.violation(x) > 1e-10) x = p.project(x);

  for (int s = S; s >= 1; --s) {
    Mask mask = masks(s, S, p.dimension);
    bool all = std::all_of(mask.begin(), mask.end(), [](bool b) { return b; });
    if (!all && p.violation(x) > 1e-10) x = p.project_conditional(x, mask);

    RunOptions ro;
    ro.free = all ? nullptr : &mask;
    ro.origin = options.origin;
    ro.trace_stride = options.trace_stride;
    if (options.observer) {
      ro.observer = [&, s](std::int64_t k, const Vector& v) {
        options.observer(s, k, v);
      };
    }
    UpdateRule rule = options.update ? options.update(p) : pgd_rule(p);
    RunResult r;
    try {
      r = run(p, x, plan.at(s), rule, ro);
    } catch (const NumericFailure& e) {
      throw NumericFailure(std::string(e.what()) + " at scale " +
                               std::to_string(s),
                           e.snapshot(), s, e.iteration());
    }
    out.trace.append(r.trace);
    x = std::move(r.x);
    if (s == 1) break;

    t0 = Clock::now();
    ProblemAtScale next = family.make_problem(s - 1);
    out.trace.allocate_ns += elapsed(t0);

    t0 = Clock::now();
    x = family.interpolate_iterate ? family.interpolate_iterate(x, s - 1)
                                   : interpolate(x);
    if (x.size() != next.dimension) {
      throw InvalidInput("interpolated iterate has the wrong dimension");
    }
    Mask next_mask = masks(s - 1, S, next.dimension);
    bool next_all =
        std::all_of(next_mask.begin(), next_mask.end(), [](bool b) { return b; });
    x = next_all ? next.project(x) : next.project_conditional(x, next_mask);
    out.trace.interpolate_ns += elapsed(t0);

    TraceRecord rec;
    rec.scale = s - 1;
    rec.iteration = 0;
    rec.objective = next.objective(x);
    rec.grad_norm = 0.0;
    rec.t_ns = since_origin();
    rec.phase = Phase::kInterpolate;
    rec.active_dimension = next.dimension;
    out.trace.records.push_back(rec);
    p = std::move(next);
  }
  out.trace.total_ns = elapsed(start);
  out.x = std::move(x);
  return out;
}

MultiscaleResult greedy_solve(const ProblemFamily& family,
                              const IterationPlan& plan, const Vector& init,
                              const MultiscaleOptions& options) {
  return multiscale_solve(family, plan, init, all_free_policy(), options);
}

MultiscaleResult lazy_solve(const ProblemFamily& family,
                            const IterationPlan& plan, const Vector& init,
                            const MultiscaleOptions& options) {
  return multiscale_solve(family, plan, init, midpoint_policy(), options);
}

}  // namespace msopt
