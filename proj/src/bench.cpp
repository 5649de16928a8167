#include "msopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "msopt/bounds.hpp"
#include "msopt/constraints.hpp"
#include "msopt/error.hpp"
#include "msopt/grid.hpp"
#include "msopt/problems.hpp"
#include "msopt/tucker.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace msopt::bench {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_ms(std::int64_t ns) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", double(ns) * 1e-6);
  return buf;
}

std::int64_t elapsed_ns(Clock::time_point a, Clock::time_point b = Clock::now()) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir);
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::optional<Experiment> parse_experiment(const std::string& name) {
  if (name == "motivating") return Experiment::kMotivating;
  if (name == "coarse-iters-sweep") return Experiment::kCoarseSweep;
  if (name == "tucker-synthetic") return Experiment::kTuckerSynthetic;
  if (name == "tucker-geoshape") return Experiment::kTuckerGeoshape;
  if (name == "bound-audit") return Experiment::kBoundAudit;
  return std::nullopt;
}

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::kMotivating: return "motivating";
    case Experiment::kCoarseSweep: return "coarse-iters-sweep";
    case Experiment::kTuckerSynthetic: return "tucker-synthetic";
    case Experiment::kTuckerGeoshape: return "tucker-geoshape";
    case Experiment::kBoundAudit: return "bound-audit";
  }
  return "?";
}

PlanSpec PlanSpec::parse(const std::string& text) {
  PlanSpec p;
  auto with_k = [&](const std::string& prefix) -> std::optional<std::int64_t> {
    if (text.rfind(prefix, 0) != 0) return std::nullopt;
    std::string rest = text.substr(prefix.size());
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')') {
      rest = rest.substr(1, rest.size() - 2);
    } else if (!rest.empty() && rest.front() == ':') {
      rest = rest.substr(1);
    } else {
      throw InvalidInput("plan " + text + ": expected " + prefix + "(K)");
    }
    try {
      size_t used = 0;
      long long k = std::stoll(rest, &used);
      if (used != rest.size() || k < 1) throw InvalidInput("bad K");
      return k;
    } catch (const std::exception&) {
      throw InvalidInput("plan " + text + ": K must be a positive integer");
    }
  };
  if (text == "single") {
    p.kind = Kind::kSingle;
  } else if (text == "greedy-one-per-coarse") {
    p.kind = Kind::kGreedyOnePerCoarse;
  } else if (text == "progress-driven") {
    p.kind = Kind::kProgress;
  } else if (auto k = with_k("greedy-uniform")) {
    p.kind = Kind::kGreedyUniform;
    p.K = *k;
  } else if (auto k2 = with_k("lazy")) {
    p.kind = Kind::kLazy;
    p.K = *k2;
  } else {
    throw InvalidInput("unknown plan " + text);
  }
  return p;
}

std::string PlanSpec::name() const {
  switch (kind) {
    case Kind::kSingle: return "single";
    case Kind::kGreedyOnePerCoarse: return "greedy-one-per-coarse";
    case Kind::kGreedyUniform: return "greedy-uniform(" + std::to_string(K) + ")";
    case Kind::kLazy: return "lazy(" + std::to_string(K) + ")";
    case Kind::kProgress: return "progress-driven";
  }
  return "?";
}

std::pair<int, int> BenchConfig::scales() const {
  int lo = 3, hi = 10;
  switch (experiment) {
    case Experiment::kMotivating: lo = 3; hi = 10; break;
    case Experiment::kCoarseSweep:
    case Experiment::kTuckerSynthetic: lo = hi = 6; break;
    case Experiment::kTuckerGeoshape: lo = hi = 10; break;
    case Experiment::kBoundAudit: lo = 3; hi = 10; break;
  }
  if (scale_min) lo = *scale_min;
  if (scale_max) hi = *scale_max;
  if (scale_min && !scale_max) hi = std::max(hi, lo);
  if (scale_max && !scale_min) lo = std::min(lo, hi);
  return {lo, hi};
}

void BenchConfig::validate() const {
  if (trials < 1) throw InvalidInput("trials must be >= 1");
  if (jobs < 1) throw InvalidInput("jobs must be >= 1");
  auto [lo, hi] = scales();
  if (lo < 3 || hi > 20 || lo > hi) {
    throw InvalidInput("scale range must satisfy 3 <= a <= b <= 20");
  }
  if (format != "csv" && format != "json") throw InvalidInput("format must be csv or json");
  if (snapshot_every < 0) throw InvalidInput("snapshot interval must be >= 0");
  if (trace_stride < 1) throw InvalidInput("trace stride must be >= 1");
  if (coarse_max < 1) throw InvalidInput("coarse sweep maximum must be >= 1");
  if (fine_cap < 1) throw InvalidInput("fine iteration cap must be >= 1");
}

// ---------------------------------------------------------------------------
// Utilities

double nearest_rank(std::vector<double> values, double percent) {
  if (values.empty()) throw InvalidInput("percentile of an empty sample");
  if (!(percent > 0 && percent <= 100)) throw InvalidInput("percent must be in (0, 100]");
  std::sort(values.begin(), values.end());
  auto n = double(values.size());
  auto rank = static_cast<size_t>(std::ceil(percent / 100.0 * n - 1e-9));
  rank = std::clamp<size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ReferenceCache::ReferenceCache(std::string dir) : dir_(std::move(dir)) {}

std::string ReferenceCache::default_dir() {
  if (const char* d = std::getenv("MSOPT_CACHE_DIR"); d && *d) return d;
  if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) {
    return (fs::path(x) / "msopt").string();
  }
  if (const char* h = std::getenv("HOME"); h && *h) {
    return (fs::path(h) / ".cache" / "msopt").string();
  }
  return (fs::temp_directory_path() / "msopt-cache").string();
}

namespace {
std::string key_name(std::uint64_t key) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx.ref", static_cast<unsigned long long>(key));
  return buf;
}
}  // namespace

std::optional<double> ReferenceCache::load(std::uint64_t key) const {
  std::ifstream in(fs::path(dir_) / key_name(key));
  if (!in) return std::nullopt;
  unsigned long long bits = 0;
  in >> std::hex >> bits;
  if (!in) return std::nullopt;
  double v;
  std::memcpy(&v, &bits, sizeof v);
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

void ReferenceCache::store(std::uint64_t key, double value) const {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) return;  // caching is best effort
  unsigned long long bits;
  std::memcpy(&bits, &value, sizeof bits);
  fs::path final_path = fs::path(dir_) / key_name(key);
  fs::path tmp = final_path;
  tmp += "." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) return;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%016llx %.17g\n", bits, value);
    out << buf;
  }
  fs::rename(tmp, final_path, ec);
  if (ec) fs::remove(tmp, ec);
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  jobs = std::clamp(jobs, 1, n);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
  if (!out) throw IoError("write failed for " + path);
}

namespace {

json trace_array(const SolveTrace& trace) {
  json arr = json::array();
  for (const auto& r : trace.records) {
    arr.push_back({{"scale", r.scale},
                   {"iter", r.iteration},
                   {"objective", r.objective},
                   {"grad_norm", r.grad_norm},
                   {"t_ns", r.t_ns},
                   {"phase", to_string(r.phase)}});
  }
  return arr;
}

}  // namespace

std::string trace_json(const SolveTrace& trace) { return trace_array(trace).dump(1); }

// ---------------------------------------------------------------------------
// Motivating example

namespace {

constexpr double kOptimalFactor = 1.05;  // "within 5% of optimal"

IterationPlan coarse_plan(const PlanSpec& plan, int S, const StoppingRule& fine) {
  IterationPlan p;
  p.per_scale.resize(static_cast<size_t>(S));
  for (int s = 2; s <= S; ++s) {
    StoppingRule r;
    switch (plan.kind) {
      case PlanSpec::Kind::kGreedyOnePerCoarse: r.max_iterations = 1; break;
      case PlanSpec::Kind::kGreedyUniform:
      case PlanSpec::Kind::kLazy: r.max_iterations = plan.K; break;
      case PlanSpec::Kind::kProgress:
        r.max_iterations = 100;
        r.relative_decrease_below = 1e-3;
        break;
      case PlanSpec::Kind::kSingle: break;
    }
    p.at(s) = r;
  }
  p.at(1) = fine;
  return p;
}

std::uint64_t reference_key(const LegendreProblemSpec& spec, const Vector& y,
                            const Vector& x0) {
  std::uint64_t h = fnv1a("legendre-reference-v1", 21);
  auto mix = [&](const auto& v) { h = fnv1a(&v, sizeof v, h); };
  mix(spec.M);
  mix(spec.S);
  mix(spec.lambda);
  mix(spec.noise_level);
  h = fnv1a(y.data(), sizeof(double) * size_t(y.size()), h);
  h = fnv1a(x0.data(), sizeof(double) * size_t(x0.size()), h);
  return h;
}

}  // namespace

MotivatingResult run_motivating(const BenchConfig& config) {
  config.validate();
  auto [lo, hi] = config.scales();
  const bool with_multi = config.plan.kind != PlanSpec::Kind::kSingle;
  std::optional<ReferenceCache> cache;
  if (config.use_cache) {
    cache.emplace(config.cache_dir.empty() ? ReferenceCache::default_dir() : config.cache_dir);
  }

  std::vector<std::shared_ptr<const LegendreOperators>> ops;
  for (int S = lo; S <= hi; ++S) {
    LegendreProblemSpec spec;
    spec.S = S;
    ops.push_back(LegendreOperators::build(spec));
  }

  const int per_job = with_multi ? 2 : 1;
  const int jobs = (hi - lo + 1) * config.trials;
  std::vector<MotivatingRun> runs(static_cast<size_t>(jobs * per_job));

  parallel_for(jobs, config.jobs, [&](int job) {
    const int S = lo + job / config.trials;
    const int trial = job % config.trials;
    const auto& op = ops[size_t(S - lo)];
    LegendreProblemSpec spec = op->spec;
    spec.seed = mix_seed(config.seed, std::uint64_t(S), std::uint64_t(trial));
    MeasurementData data = generate_measurements(spec);
    ProblemFamily family = make_family(op, data.y);
    const Index fine_dim = family.hierarchy.fine_points();

    ProblemAtScale p1 = family.make_problem(1);
    Vector x0 = p1.project(gaussian_vector(fine_dim, spec.seed));
    std::uint64_t key = reference_key(spec, data.y, x0);
    std::optional<double> ref;
    if (cache) ref = cache->load(key);
    if (!ref) {
      ref = reference_optimum(p1, x0).objective;
      if (cache) cache->store(key, *ref);
    }
    StoppingRule fine;
    fine.objective_within_factor_of = std::make_pair(kOptimalFactor, *ref);
    fine.max_iterations = config.fine_cap;

    const bool keep = trial == 0;
    const std::int64_t stride =
        keep && config.snapshot_every > 0 ? config.snapshot_every : config.trace_stride;

    // Single scale.
    {
      MotivatingRun run_out;
      run_out.S = S;
      run_out.method = "single";
      run_out.trial = trial;
      run_out.reference = *ref;
      Grid1D grid = family.hierarchy.grid(1);
      auto t0 = Clock::now();
      ProblemAtScale p = family.make_problem(1);
      Vector x = p.project(gaussian_vector(fine_dim, spec.seed));
      RunOptions ro;
      ro.origin = t0;
      ro.trace_stride = stride;
      if (keep && config.snapshot_every > 0) {
        ro.observer = [&](std::int64_t k, const Vector& v) {
          run_out.snapshots.push_back({1, k, grid.nodes(), v});
        };
      }
      RunResult r = run(p, x, fine, pgd_rule(p), ro);
      run_out.nanos = elapsed_ns(t0);
      run_out.fine_iters = r.steps;
      run_out.capped = r.stop_reason == "max_iterations";
      run_out.steps_by_scale = std::vector<std::int64_t>(size_t(S), 0);
      run_out.steps_by_scale[0] = r.steps;
      run_out.cost_units = measured_cost(r.trace, family.cost_exponent, fine_dim).units;
      run_out.final_objective = p.objective(r.x);
      if (keep) run_out.trace = std::move(r.trace);
      runs[size_t(job * per_job)] = std::move(run_out);
    }
    if (!with_multi) return;

    // Multiscale.
    MotivatingRun run_out;
    run_out.S = S;
    run_out.method = config.plan.name();
    run_out.trial = trial;
    run_out.reference = *ref;
    run_out.lazy = config.plan.kind == PlanSpec::Kind::kLazy;
    IterationPlan plan = coarse_plan(config.plan, S, fine);
    MaskPolicy masks = all_free_policy();
    if (run_out.lazy) {
      MaskPolicy mid = midpoint_policy();
      masks = [mid](int s, int SS, Index n) { return s == 1 ? Mask(size_t(n), true) : mid(s, SS, n); };
    }
    auto t0 = Clock::now();
    MultiscaleOptions mo;
    mo.origin = t0;
    mo.trace_stride = stride;
    if (keep && config.snapshot_every > 0) {
      mo.observer = [&](int s, std::int64_t k, const Vector& v) {
        run_out.snapshots.push_back({s, k, family.hierarchy.grid(s).nodes(), v});
      };
    }
    Vector init = gaussian_vector(family.hierarchy.points(S), spec.seed);
    MultiscaleResult r = multiscale_solve(family, plan, init, masks, mo);
    run_out.nanos = elapsed_ns(t0);
    run_out.fine_iters = r.trace.steps_at_scale(1);
    for (const auto& sc : r.trace.scales) {
      if (sc.scale == 1) run_out.capped = sc.stop_reason == "max_iterations";
    }
    for (int s = 1; s <= S; ++s) run_out.steps_by_scale.push_back(r.trace.steps_at_scale(s));
    run_out.cost_units = measured_cost(r.trace, family.cost_exponent, fine_dim).units;
    run_out.final_objective = p1.objective(r.x);
    if (keep) run_out.trace = std::move(r.trace);
    runs[size_t(job * per_job + 1)] = std::move(run_out);
  });

  MotivatingResult out;
  out.runs = std::move(runs);
  std::vector<std::string> methods = {"single"};
  if (with_multi) methods.push_back(config.plan.name());
  for (int S = lo; S <= hi; ++S) {
    for (const auto& m : methods) {
      std::vector<double> ms;
      for (const auto& r : out.runs) {
        if (r.S == S && r.method == m) ms.push_back(double(r.nanos) * 1e-6);
      }
      out.percentiles.push_back(
          {S, m, nearest_rank(ms, 5), nearest_rank(ms, 50), nearest_rank(ms, 95)});
    }
  }
  return out;
}

void write_motivating(const MotivatingResult& result, const BenchConfig& config) {
  ensure_dir(config.out_dir);
  const bool as_json = config.format == "json";
  auto [lo, hi] = config.scales();

  if (as_json) {
    json timing = json::array();
    for (const auto& r : result.runs) {
      timing.push_back({{"S", r.S},
                        {"method", r.method},
                        {"trial", r.trial},
                        {"millis", double(r.nanos) * 1e-6},
                        {"fine_iters", r.fine_iters},
                        {"total_cost_units", r.cost_units}});
    }
    write_text(join_path(config.out_dir, "timing.json"), timing.dump(1) + "\n");
    json pct = json::array();
    for (const auto& p : result.percentiles) {
      pct.push_back({{"S", p.S}, {"method", p.method}, {"p5", p.p5}, {"p50", p.p50}, {"p95", p.p95}});
    }
    write_text(join_path(config.out_dir, "percentiles.json"), pct.dump(1) + "\n");
  } else {
    std::vector<std::string> rows;
    for (const auto& r : result.runs) {
      rows.push_back(std::to_string(r.S) + "," + r.method + "," + std::to_string(r.trial) +
                     "," + fmt_ms(r.nanos) + "," + std::to_string(r.fine_iters) + "," +
                     fmt(r.cost_units));
    }
    write_csv(join_path(config.out_dir, "timing.csv"),
              "S,method,trial,millis,fine_iters,total_cost_units", rows);
    rows.clear();
    for (const auto& p : result.percentiles) {
      rows.push_back(std::to_string(p.S) + "," + p.method + "," + fmt(p.p5) + "," +
                     fmt(p.p50) + "," + fmt(p.p95));
    }
    write_csv(join_path(config.out_dir, "percentiles.csv"), "S,method,p5,p50,p95", rows);
  }

  // Loss-versus-time traces of trial 0 at the largest S.
  std::vector<std::string> rows;
  json traces = json::object();
  for (const auto& r : result.runs) {
    if (r.trial != 0 || r.S != hi) continue;
    if (as_json) {
      traces[r.method] = trace_array(r.trace);
      continue;
    }
    for (const auto& rec : r.trace.records) {
      rows.push_back(r.method + "," + std::to_string(rec.t_ns) + "," +
                     std::to_string(rec.scale) + "," + fmt(rec.objective) + "," +
                     to_string(rec.phase));
    }
  }
  if (as_json) {
    for (auto& [method, arr] : traces.items()) {
      std::string safe = method;
      for (char& c : safe) {
        if (c == '(' || c == ')') c = '_';
      }
      write_text(join_path(config.out_dir, "trace_" + safe + ".json"), arr.dump(1) + "\n");
    }
  } else {
    write_csv(join_path(config.out_dir, "loss_time.csv"), "method,t_nanos,scale,objective,phase",
              rows);
  }

  if (config.snapshot_every > 0) {
    for (const auto& r : result.runs) {
      if (r.trial != 0 || r.snapshots.empty()) continue;
      std::vector<std::string> srows;
      for (const auto& snap : r.snapshots) {
        for (Index i = 0; i < snap.values.size(); ++i) {
          srows.push_back(std::to_string(snap.scale) + "," + std::to_string(snap.iteration) +
                          "," + std::to_string(i) + "," + fmt(snap.values[i]));
        }
      }
      std::string name = r.method == "single" ? "iterates_single_S" : "iterates_S";
      write_csv(join_path(config.out_dir, name + std::to_string(r.S) + ".csv"),
                "scale,iter,node,value", srows);
    }
  }
}

// ---------------------------------------------------------------------------
// Tucker experiments

namespace {

struct TuckerSetup {
  DenseTensor Y;
  Matrix A_true;
  Index R = 3;
  std::set<Index> continuous;
  tucker::Options fine;
  tucker::Options coarse;
};

TuckerSetup tucker_setup(const BenchConfig& config) {
  TuckerSetup t;
  auto [lo, hi] = config.scales();
  (void)lo;
  const Index points = dyadic_points(hi);
  if (config.experiment == Experiment::kTuckerGeoshape) {
    tucker::GeoshapeSpec g;
    g.K = points;
    g.seed = config.seed;
    auto data = tucker::geoshape_synthetic(g);
    t.Y = std::move(data.Y);
    t.A_true = std::move(data.A_true);
    t.R = g.R;
    t.continuous = {2};
    t.fine.rel_error_tol = 0.12;
    t.fine.max_iterations = 200;
    t.fine.core_leading_modes = 2;
  } else {
    tucker::MixtureSpec m;
    m.points = points;
    auto data = tucker::synth_mixtures(m);
    t.Y = std::move(data.Y);
    t.A_true = std::move(data.A_true);
    t.continuous = {1, 2, 3};
    t.fine.mean_rel_error_tol = 0.05;
    t.fine.mre_floor = 1e-4;
    t.fine.objective_tol = 1e-6;
    t.fine.max_iterations = 50;
    t.fine.subblock_updates = true;
  }
  t.coarse = t.fine;
  return t;
}

double max_ascent(const tucker::Result& r) {
  double worst = -INFINITY;
  for (const auto& d : r.descent) {
    worst = std::max({worst, d.after_a - d.before, d.after_b - d.after_a});
  }
  return r.descent.empty() ? 0.0 : worst;
}

}  // namespace

std::int64_t tucker_peak_bytes(const std::vector<Index>& dims, Index R, bool multiscale,
                               const std::vector<Index>& continuous) {
  auto prod = [](const std::vector<Index>& d, size_t from) {
    Index p = 1;
    for (size_t i = from; i < d.size(); ++i) p *= d[i];
    return p;
  };
  // Data, core, A^T Y, the core step and one saved row.
  auto working = [&](const std::vector<Index>& d) {
    Index P = prod(d, 1);
    return d[0] * P + 3 * R * P + P + 4 * d[0] * R;
  };
  std::int64_t doubles = working(dims);
  if (multiscale && !continuous.empty()) {
    std::vector<Index> d = dims;
    std::int64_t pyramid = 0;
    for (;;) {
      bool more = true;
      for (Index m : continuous) more = more && d[size_t(m)] > 3;
      if (!more) break;
      for (Index m : continuous) d[size_t(m)] = (d[size_t(m)] + 1) / 2;
      pyramid += prod(d, 0);
    }
    // The interpolated core exists next to the previous one at a transition.
    doubles += pyramid + R * prod(dims, 1);
  }
  return doubles * std::int64_t(sizeof(double));
}

TuckerResult run_tucker(const BenchConfig& config) {
  config.validate();
  TuckerSetup setup = tucker_setup(config);
  const int n = config.trials * 2;
  TuckerResult out;
  out.runs.resize(size_t(n));
  parallel_for(n, config.jobs, [&](int job) {
    const int trial = job / 2;
    const bool multi = job % 2 == 1;
    tucker::Options o = setup.fine;
    o.seed = mix_seed(config.seed, std::uint64_t(trial), 17);
    tucker::Options c = setup.coarse;
    c.seed = o.seed;
    auto t0 = Clock::now();
    tucker::Result r = multi ? tucker::multiscale_factorize(setup.Y, setup.R, setup.continuous, o, c, t0)
                             : tucker::bcd_factorize(setup.Y, setup.R, o, std::nullopt, 1, t0);
    TuckerRun run_out;
    run_out.nanos = elapsed_ns(t0);
    run_out.method = multi ? "multiscale" : "single";
    run_out.trial = trial;
    run_out.fine_iters = r.iterations;
    run_out.total_iters = r.trace.total_steps();
    run_out.rel_error = r.final_rel_error;
    run_out.mean_rel_error = r.final_mean_rel_error;
    run_out.a_error = tucker::aligned_max_error(r.factors.A, setup.A_true);
    run_out.max_ascent = max_ascent(r);
    run_out.max_violation = r.max_violation;
    run_out.stop_reason = r.stop_reason;
    out.runs[size_t(job)] = std::move(run_out);
  });
  std::vector<Index> cont(setup.continuous.begin(), setup.continuous.end());
  for (const char* m : {"single", "multiscale"}) {
    std::vector<double> ms;
    for (const auto& r : out.runs) {
      if (r.method == m) ms.push_back(double(r.nanos) * 1e-6);
    }
    TuckerSummary s;
    s.method = m;
    s.trials = int(ms.size());
    s.min_ms = *std::min_element(ms.begin(), ms.end());
    s.median_ms = nearest_rank(ms, 50);
    s.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / double(ms.size());
    double var = 0.0;
    for (double v : ms) var += (v - s.mean_ms) * (v - s.mean_ms);
    s.std_ms = ms.size() > 1 ? std::sqrt(var / double(ms.size() - 1)) : 0.0;
    s.peak_bytes = tucker_peak_bytes(setup.Y.dims(), setup.R, std::string(m) == "multiscale", cont);
    out.summary.push_back(s);
  }
  return out;
}

void write_tucker(const TuckerResult& result, const BenchConfig& config) {
  ensure_dir(config.out_dir);
  if (config.format == "json") {
    json trials = json::array();
    for (const auto& r : result.runs) {
      trials.push_back({{"method", r.method},
                        {"trial", r.trial},
                        {"millis", double(r.nanos) * 1e-6},
                        {"fine_iters", r.fine_iters},
                        {"total_iters", r.total_iters},
                        {"rel_error", r.rel_error},
                        {"mean_rel_error", r.mean_rel_error},
                        {"a_error", r.a_error},
                        {"stop_reason", r.stop_reason}});
    }
    write_text(join_path(config.out_dir, "tucker_trials.json"), trials.dump(1) + "\n");
    json summary = json::array();
    for (const auto& s : result.summary) {
      summary.push_back({{"method", s.method},
                         {"trials", s.trials},
                         {"min_ms", s.min_ms},
                         {"median_ms", s.median_ms},
                         {"mean_ms", s.mean_ms},
                         {"std_ms", s.std_ms},
                         {"peak_bytes", s.peak_bytes}});
    }
    write_text(join_path(config.out_dir, "tucker_summary.json"), summary.dump(1) + "\n");
    return;
  }
  std::vector<std::string> rows;
  for (const auto& r : result.runs) {
    rows.push_back(r.method + "," + std::to_string(r.trial) + "," + fmt_ms(r.nanos) + "," +
                   std::to_string(r.fine_iters) + "," + std::to_string(r.total_iters) + "," +
                   fmt(r.rel_error) + "," + fmt(r.mean_rel_error) + "," + fmt(r.a_error) + "," +
                   r.stop_reason);
  }
  write_csv(join_path(config.out_dir, "tucker_trials.csv"),
            "method,trial,millis,fine_iters,total_iters,rel_error,mean_rel_error,a_error,stop_reason",
            rows);
  rows.clear();
  for (const auto& s : result.summary) {
    rows.push_back(s.method + "," + std::to_string(s.trials) + "," + fmt(s.min_ms) + "," +
                   fmt(s.median_ms) + "," + fmt(s.mean_ms) + "," + fmt(s.std_ms) + "," +
                   std::to_string(s.peak_bytes));
  }
  write_csv(join_path(config.out_dir, "tucker_summary.csv"),
            "method,trials,min_ms,median_ms,mean_ms,std_ms,peak_bytes", rows);
}

std::vector<SweepRow> run_coarse_sweep(const BenchConfig& config) {
  config.validate();
  BenchConfig c = config;
  c.experiment = Experiment::kTuckerSynthetic;
  TuckerSetup setup = tucker_setup(c);
  tucker::Options fine;
  fine.objective_tol = 1e-6;
  fine.max_iterations = 100000;
  fine.subblock_updates = true;
  fine.record_descent = false;
  const std::int64_t Kmax = config.coarse_max;
  const int n = int(Kmax) * config.trials;
  std::vector<std::int64_t> nanos(static_cast<size_t>(n)), iters(static_cast<size_t>(n));
  parallel_for(n, config.jobs, [&](int job) {
    const std::int64_t K = 1 + job / config.trials;
    const int trial = job % config.trials;
    tucker::Options o = fine;
    o.seed = mix_seed(config.seed, std::uint64_t(trial), 29);
    tucker::Options coarse = o;
    coarse.objective_tol.reset();
    coarse.max_iterations = K;
    auto t0 = Clock::now();
    auto r = tucker::multiscale_factorize(setup.Y, setup.R, setup.continuous, o, coarse, t0);
    nanos[size_t(job)] = elapsed_ns(t0);
    iters[size_t(job)] = r.iterations;
  });
  std::vector<SweepRow> rows;
  for (std::int64_t K = 1; K <= Kmax; ++K) {
    std::vector<double> ms, it;
    for (int t = 0; t < config.trials; ++t) {
      size_t j = size_t((K - 1) * config.trials + t);
      ms.push_back(double(nanos[j]) * 1e-6);
      it.push_back(double(iters[j]));
    }
    rows.push_back({K, nearest_rank(ms, 50), nearest_rank(ms, 25), nearest_rank(ms, 75),
                    nearest_rank(it, 50)});
  }
  return rows;
}

void write_coarse_sweep(const std::vector<SweepRow>& rows, const BenchConfig& config) {
  ensure_dir(config.out_dir);
  if (config.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"K_s", r.K_s},
                     {"median_time", r.median_ms},
                     {"q1", r.q1_ms},
                     {"q3", r.q3_ms},
                     {"fine_iters", r.fine_iters}});
    }
    write_text(join_path(config.out_dir, "sweep.json"), arr.dump(1) + "\n");
    return;
  }
  std::vector<std::string> out;
  for (const auto& r : rows) {
    out.push_back(std::to_string(r.K_s) + "," + fmt(r.median_ms) + "," + fmt(r.q1_ms) + "," +
                  fmt(r.q3_ms) + "," + fmt(r.fine_iters));
  }
  write_csv(join_path(config.out_dir, "sweep.csv"), "K_s,median_time,q1,q3,fine_iters", out);
}

// ---------------------------------------------------------------------------
// Bound audit

bool AuditReport::ok() const {
  for (const auto& e : entries) {
    if (e.violations > 0) return false;
  }
  return true;
}

namespace {

// Ratios above this count as violations; it only absorbs rounding in
// cases where the bound is attained.
constexpr double kRatioSlack = 1e-12;

class Auditor {
 public:
  explicit Auditor(std::string name) { e_.bound = std::move(name); }

  void add(double measured, double bound, std::map<std::string, double> params) {
    ++e_.trials;
    double ratio = bound > 0 ? measured / bound : (measured > 0 ? INFINITY : 0.0);
    if (ratio > 1.0 + kRatioSlack) ++e_.violations;
    if (ratio > e_.max_ratio || e_.trials == 1) {
      e_.max_ratio = ratio;
      params["measured"] = measured;
      params["bound"] = bound;
      e_.witness = std::move(params);
    }
  }

  AuditEntry take() { return std::move(e_); }

 private:
  AuditEntry e_;
};

struct Instance {
  std::function<double(double)> f;
  double lower, upper, L;
  std::uint64_t seed;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  in.lower = -2.0 + 2.0 * u(rng);
  in.upper = in.lower + 0.5 + 3.0 * u(rng);
  in.L = 0.1 + 5.0 * u(rng);
  in.seed = rng();
  int pieces = 1 + int(rng() % 40);
  in.f = random_lipschitz_function(in.lower, in.upper, in.L, pieces, in.seed);
  return in;
}

double simpson_l2_sq(const std::function<double(double)>& g, double a, double b, int panels) {
  double h = (b - a) / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) {
    double x0 = a + i * h;
    double v0 = g(x0), v1 = g(x0 + h / 2), v2 = g(x0 + h);
    s += h / 6.0 * (v0 * v0 + 4 * v1 * v1 + v2 * v2);
  }
  return s;
}

}  // namespace

AuditReport run_bound_audit(std::int64_t trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidInput("audit trials must be >= 1");
  AuditReport report;
  report.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal;

  {
    Auditor a("lipschitz-interpolation");
    for (std::int64_t t = 0; t < trials; ++t) {
      Instance in = random_instance(rng);
      double x = in.lower + (in.upper - in.lower) * u(rng);
      double y = in.lower + (in.upper - in.lower) * u(rng);
      double l1 = u(rng), l2 = 1.0 - l1;
      double measured = std::abs(in.f(l1 * x + l2 * y) - (l1 * in.f(x) + l2 * in.f(y)));
      a.add(measured, bounds::lipschitz_interp_bound(in.L, l1, l2, std::abs(x - y)),
            {{"L", in.L}, {"lambda1", l1}, {"a", x}, {"b", y}});
    }
    // The witness attains the bound.
    double l1 = 0.3, l2 = 0.7;
    auto w = bounds::tight_witness(l1, l2, 0.0, 1.0, 2.0);
    a.add(std::abs(w(l1 * 0.0 + l2 * 1.0) - (l1 * w(0.0) + l2 * w(1.0))),
          bounds::lipschitz_interp_bound(2.0, l1, l2, 1.0),
          {{"witness", 1.0}, {"L", 2.0}, {"lambda1", l1}});
    report.entries.push_back(a.take());
  }

  {
    Auditor exact("exact-interpolation");
    Auditor inexact("inexact-interpolation");
    for (std::int64_t t = 0; t < trials; ++t) {
      Instance in = random_instance(rng);
      int k = 1 + int(rng() % 10);
      Index I = dyadic_points(k);
      Grid1D coarse(in.lower, in.upper, I);
      Grid1D fine(in.lower, in.upper, 2 * I - 1);
      Vector xc = sample(in.f, coarse).values;
      Vector xf = sample(in.f, fine).values;
      double w = in.upper - in.lower;
      exact.add((interpolate(xc) - xf).norm(), bounds::exact_interp_bound(in.L, I, w),
                {{"L", in.L}, {"I", double(I)}, {"width", w}});
      Vector delta(I);
      double scale = std::pow(10.0, -4.0 + 4.0 * u(rng));
      for (Index i = 0; i < I; ++i) delta[i] = scale * normal(rng);
      inexact.add((interpolate(xc + delta) - xf).norm(),
                  bounds::inexact_interp_bound(in.L, I, w, delta.norm()),
                  {{"L", in.L}, {"I", double(I)}, {"delta_norm", delta.norm()}});
    }
    report.entries.push_back(exact.take());
    report.entries.push_back(inexact.take());
  }

  {
    Auditor l1("l1-rescale");
    Auditor lin("linear-rescale");
    for (std::int64_t t = 0; t < trials; ++t) {
      Instance in = random_instance(rng);
      Index I = 3 + Index(rng() % 400);
      Grid1D g(in.lower, in.upper, I);
      Vector x = sample(in.f, g).values;
      double w = in.upper - in.lower;
      Vector xc(( I + 1) / 2);
      for (Index i = 0; i < xc.size(); ++i) xc[i] = x[2 * i];
      auto tgt = l1_rescale_with_bound(x.sum(), I, in.L, w);
      l1.add(std::abs(xc.sum() - tgt.scalar()), tgt.slack_bound,
             {{"L", in.L}, {"I", double(I)}, {"width", w}});

      // Rows sample Lipschitz functions; the product bound covers f * g.
      int K = 1 + int(rng() % 4);
      Matrix A(K, I);
      double Lfg = 0.0;
      double fsup = x.cwiseAbs().maxCoeff();
      for (int r = 0; r < K; ++r) {
        double Lg = 0.1 + 3.0 * u(rng);
        auto gfun = random_lipschitz_function(in.lower, in.upper, Lg, 1 + int(rng() % 10), rng());
        Vector row = sample(gfun, g).values;
        A.row(r) = row.transpose();
        Lfg = std::max(Lfg, product_lipschitz(in.L, Lg, fsup + in.L * w, row.cwiseAbs().maxCoeff() + Lg * w));
      }
      Vector b = A * x;
      auto lt = linear_rescale_with_bound(b, I, Lfg, w);
      lin.add((subsample_columns(A) * xc - lt.target).norm(), lt.slack_bound,
              {{"L_fg", Lfg}, {"I", double(I)}, {"rows", double(K)}});
    }
    report.entries.push_back(l1.take());
    report.entries.push_back(lin.take());
  }

  {
    Auditor dist("piecewise-distance");
    Auditor approx("piecewise-approximation");
    for (std::int64_t t = 0; t < trials; ++t) {
      Index I = 2 + Index(rng() % 64);
      double lower = -1.0 + u(rng), width = 0.5 + 2.0 * u(rng);
      Grid1D g(lower, lower + width, I);
      double dt = g.spacing();
      Vector d(I);
      for (Index i = 0; i < I; ++i) d[i] = normal(rng);
      // Exact L2 norm of the piecewise-linear interpolant of d.
      double l2 = 0.0;
      for (Index i = 0; i + 1 < I; ++i) {
        l2 += dt * (d[i] * d[i] + d[i] * d[i + 1] + d[i + 1] * d[i + 1]) / 3.0;
      }
      dist.add(std::sqrt(l2), bounds::piecewise_distance_bound(dt, d.norm()),
               {{"I", double(I)}, {"dt", dt}});
    }
    std::int64_t n = std::max<std::int64_t>(20, trials / 20);
    for (std::int64_t t = 0; t < n; ++t) {
      Instance in = random_instance(rng);
      Index I = 2 + Index(rng() % 32);
      Grid1D g(in.lower, in.upper, I);
      SampledFunction fs = sample(in.f, g);
      auto diff = [&](double s) { return in.f(s) - piecewise_eval(fs, std::clamp(s, in.lower, in.upper)); };
      double l2 = std::sqrt(simpson_l2_sq(diff, in.lower, in.upper, int(I - 1) * 64));
      approx.add(l2, bounds::piecewise_approx_bound(in.L, in.upper - in.lower, g.spacing()),
                 {{"L", in.L}, {"I", double(I)}});
    }
    report.entries.push_back(dist.take());
    report.entries.push_back(approx.take());
  }

  {
    Auditor greedy("greedy-error");
    Auditor lazy("lazy-error");
    std::int64_t n = std::max<std::int64_t>(20, trials / 50);
    for (std::int64_t t = 0; t < n; ++t) {
      Instance in = random_instance(rng);
      QuadraticFamilySpec qs;
      qs.S = 2 + int(rng() % 5);
      qs.lower = in.lower;
      qs.upper = in.upper;
      qs.L = 1.0;
      qs.mu = 0.05 + 0.9 * u(rng);
      qs.diagonal = (t % 2 == 0);
      qs.seed = rng();
      qs.solution = in.f;
      qs.solution_lipschitz = in.L;
      auto fam = make_quadratic_family(qs);
      std::vector<std::int64_t> K(size_t(qs.S));
      for (auto& k : K) k = std::int64_t(rng() % 6);
      Vector init = gaussian_vector(fam.family.hierarchy.points(qs.S), rng());
      bounds::BoundInputs bi;
      bi.L_f = in.L;
      bi.q = fam.q;
      bi.S = qs.S;
      bi.K = K;
      bi.width = in.upper - in.lower;
      bi.initial_error = (init - fam.minimizers.back()).norm();
      auto plan = IterationPlan::fixed(K);
      auto rg = greedy_solve(fam.family, plan, init);
      greedy.add((rg.x - fam.minimizers.front()).norm(), bounds::greedy_error_bound(bi),
                 {{"S", double(qs.S)}, {"q", fam.q}, {"L_f", in.L}});
      if (qs.diagonal) {
        auto rl = lazy_solve(fam.family, plan, init);
        lazy.add((rl.x - fam.minimizers.front()).norm(), bounds::lazy_error_bound_general(bi),
                 {{"S", double(qs.S)}, {"q", fam.q}, {"L_f", in.L}});
      }
    }
    report.entries.push_back(greedy.take());
    report.entries.push_back(lazy.take());
  }
  return report;
}

std::string audit_json(const AuditReport& report) {
  json j;
  j["seed"] = report.seed;
  j["ok"] = report.ok();
  j["entries"] = json::array();
  for (const auto& e : report.entries) {
    json w = json::object();
    for (const auto& [k, v] : e.witness) w[k] = v;
    j["entries"].push_back({{"bound", e.bound},
                            {"trials", e.trials},
                            {"violations", e.violations},
                            {"max_ratio", e.max_ratio},
                            {"witness", w}});
  }
  return j.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Schema validation

namespace {

enum class Col { kInt, kReal, kText, kPhase };

struct Schema {
  std::string header;
  std::vector<Col> cols;
};

const std::map<std::string, Schema>& csv_schemas() {
  static const std::map<std::string, Schema> s = {
      {"timing", {"S,method,trial,millis,fine_iters,total_cost_units",
                  {Col::kInt, Col::kText, Col::kInt, Col::kReal, Col::kInt, Col::kReal}}},
      {"percentiles", {"S,method,p5,p50,p95",
                       {Col::kInt, Col::kText, Col::kReal, Col::kReal, Col::kReal}}},
      {"loss_time", {"method,t_nanos,scale,objective,phase",
                     {Col::kText, Col::kInt, Col::kInt, Col::kReal, Col::kPhase}}},
      {"iterates", {"scale,iter,node,value", {Col::kInt, Col::kInt, Col::kInt, Col::kReal}}},
      {"sweep", {"K_s,median_time,q1,q3,fine_iters",
                 {Col::kInt, Col::kReal, Col::kReal, Col::kReal, Col::kReal}}},
      {"tucker_trials",
       {"method,trial,millis,fine_iters,total_iters,rel_error,mean_rel_error,a_error,stop_reason",
        {Col::kText, Col::kInt, Col::kReal, Col::kInt, Col::kInt, Col::kReal, Col::kReal,
         Col::kReal, Col::kText}}},
      {"tucker_summary", {"method,trials,min_ms,median_ms,mean_ms,std_ms,peak_bytes",
                          {Col::kText, Col::kInt, Col::kReal, Col::kReal, Col::kReal,
                           Col::kReal, Col::kInt}}},
  };
  return s;
}

std::string schema_for(const std::string& stem) {
  if (stem.rfind("iterates", 0) == 0) return "iterates";
  if (csv_schemas().count(stem)) return stem;
  return "";
}

bool parse_int(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

bool parse_real(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void check_csv(const std::string& path, const std::string& kind, std::vector<std::string>& errs) {
  const Schema& sc = csv_schemas().at(kind);
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) {
    errs.push_back(path + ": empty file");
    return;
  }
  if (line != sc.header) {
    errs.push_back(path + ": header is '" + line + "', expected '" + sc.header + "'");
    return;
  }
  std::int64_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    auto cells = split(line);
    std::string where = path + ":" + std::to_string(n);
    if (cells.size() != sc.cols.size()) {
      errs.push_back(where + ": expected " + std::to_string(sc.cols.size()) + " fields");
      continue;
    }
    std::vector<double> reals(cells.size(), 0.0);
    for (size_t c = 0; c < cells.size(); ++c) {
      bool ok = true;
      switch (sc.cols[c]) {
        case Col::kInt: ok = parse_int(cells[c]); reals[c] = ok ? std::stod(cells[c]) : 0; break;
        case Col::kReal: ok = parse_real(cells[c], reals[c]); break;
        case Col::kText: ok = !cells[c].empty(); break;
        case Col::kPhase:
          ok = cells[c] == "step" || cells[c] == "interpolate" || cells[c] == "allocate";
          break;
      }
      if (!ok) errs.push_back(where + ": bad value '" + cells[c] + "' in column " + std::to_string(c + 1));
    }
    if (kind == "percentiles" && !(reals[2] <= reals[3] && reals[3] <= reals[4])) {
      errs.push_back(where + ": percentiles out of order");
    }
    if (kind == "sweep" && !(reals[2] <= reals[1] && reals[1] <= reals[3])) {
      errs.push_back(where + ": quartiles out of order");
    }
    if (kind == "loss_time" && reals[1] < 0) errs.push_back(where + ": negative time");
  }
}

void check_json(const std::string& path, std::vector<std::string>& errs) {
  json j;
  try {
    std::ifstream in(path);
    j = json::parse(in);
  } catch (const std::exception& e) {
    errs.push_back(path + ": not valid JSON (" + e.what() + ")");
    return;
  }
  auto require_keys = [&](const json& obj, std::initializer_list<const char*> keys,
                          const std::string& where) {
    if (!obj.is_object()) {
      errs.push_back(where + ": expected an object");
      return;
    }
    for (const char* k : keys) {
      if (!obj.contains(k)) errs.push_back(where + ": missing key '" + k + "'");
    }
  };
  std::string stem = fs::path(path).stem().string();
  if (j.is_object() && j.contains("entries")) {
    for (size_t i = 0; i < j["entries"].size(); ++i) {
      require_keys(j["entries"][i], {"bound", "trials", "violations", "max_ratio", "witness"},
                   path + " entry " + std::to_string(i));
    }
    return;
  }
  if (!j.is_array()) {
    errs.push_back(path + ": expected an array");
    return;
  }
  for (size_t i = 0; i < j.size(); ++i) {
    std::string where = path + " item " + std::to_string(i);
    if (stem.rfind("trace", 0) == 0) {
      require_keys(j[i], {"scale", "iter", "objective", "grad_norm", "t_ns", "phase"}, where);
      if (j[i].contains("t_ns") && !j[i]["t_ns"].is_number_integer()) {
        errs.push_back(where + ": t_ns must be an integer");
      }
    } else if (stem == "timing") {
      require_keys(j[i], {"S", "method", "trial", "millis", "fine_iters", "total_cost_units"}, where);
    } else if (stem == "percentiles") {
      require_keys(j[i], {"S", "method", "p5", "p50", "p95"}, where);
      if (j[i].contains("p95") && !(j[i]["p5"] <= j[i]["p50"] && j[i]["p50"] <= j[i]["p95"])) {
        errs.push_back(where + ": percentiles out of order");
      }
    } else if (stem == "sweep") {
      require_keys(j[i], {"K_s", "median_time", "q1", "q3", "fine_iters"}, where);
    } else if (stem == "tucker_trials") {
      require_keys(j[i], {"method", "trial", "millis", "fine_iters", "rel_error"}, where);
    } else if (stem == "tucker_summary") {
      require_keys(j[i], {"method", "trials", "min_ms", "median_ms", "mean_ms", "std_ms", "peak_bytes"},
                   where);
    } else {
      errs.push_back(path + ": unknown JSON file kind");
      return;
    }
  }
}

}  // namespace

std::vector<std::string> validate_file(const std::string& path) {
  std::vector<std::string> errs;
  if (!fs::is_regular_file(path)) {
    errs.push_back(path + ": no such file");
    return errs;
  }
  fs::path p(path);
  if (p.extension() == ".json") {
    check_json(path, errs);
  } else if (p.extension() == ".csv") {
    std::string kind = schema_for(p.stem().string());
    if (kind.empty()) errs.push_back(path + ": unknown CSV file kind");
    else check_csv(path, kind, errs);
  } else {
    errs.push_back(path + ": unknown file type");
  }
  return errs;
}

int run_experiment(const BenchConfig& config) {
  config.validate();
  switch (config.experiment) {
    case Experiment::kMotivating: {
      MotivatingResult r = run_motivating(config);
      write_motivating(r, config);
      auto capped = std::count_if(r.runs.begin(), r.runs.end(), [](const auto& x) { return x.capped; });
      if (capped > 0) {
        std::fprintf(stderr, "warning: %lld run(s) hit the fine iteration cap (%lld)\n",
                     static_cast<long long>(capped), static_cast<long long>(config.fine_cap));
      }
      return 0;
    }
    case Experiment::kCoarseSweep:
      write_coarse_sweep(run_coarse_sweep(config), config);
      return 0;
    case Experiment::kTuckerSynthetic:
    case Experiment::kTuckerGeoshape:
      write_tucker(run_tucker(config), config);
      return 0;
    case Experiment::kBoundAudit: {
      ensure_dir(config.out_dir);
      AuditReport r = run_bound_audit(config.trials, config.seed);
      write_text(join_path(config.out_dir, "audit.json"), audit_json(r));
      return r.ok() ? 0 : 1;
    }
  }
  return 0;
}

}  // namespace msopt::bench
