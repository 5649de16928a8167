#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msopt/multiscale.hpp"
#include "msopt/solver.hpp"

namespace msopt::bench {

enum class Experiment {
  kMotivating,
  kCoarseSweep,
  kTuckerSynthetic,
  kTuckerGeoshape,
  kBoundAudit
};

std::optional<Experiment> parse_experiment(const std::string& name);
const char* to_string(Experiment e);

/// Coarse-scale schedule of the multiscale method. The finest scale always
/// runs to the experiment's stopping rule.
struct PlanSpec {
  enum class Kind { kSingle, kGreedyOnePerCoarse, kGreedyUniform, kLazy, kProgress };
  Kind kind = Kind::kGreedyOnePerCoarse;
  std::int64_t K = 1;  // coarse iterations for greedy-uniform and lazy

  /// "single", "greedy-one-per-coarse", "greedy-uniform(K)", "lazy(K)",
  /// "progress-driven". "greedy-uniform:K" is accepted too.
  static PlanSpec parse(const std::string& text);
  std::string name() const;
};

struct BenchConfig {
  Experiment experiment = Experiment::kMotivating;
  std::optional<int> scale_min;
  std::optional<int> scale_max;
  int trials = 5;
  std::uint64_t seed = 0;
  PlanSpec plan;
  int jobs = 1;
  std::string out_dir = ".";
  std::string format = "csv";  // or "json"
  std::int64_t snapshot_every = 0;  // iterate snapshots; 0 disables
  std::int64_t trace_stride = 25;
  std::int64_t coarse_max = 20;  // K_s sweep upper end
  std::int64_t fine_cap = 1000000;  // fine-stage iteration cap in the motivating runs
  std::string cache_dir;  // empty: MSOPT_CACHE_DIR or a per-user default
  bool use_cache = true;

  void validate() const;
  /// Scale range with per-experiment defaults filled in.
  std::pair<int, int> scales() const;
};

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
double nearest_rank(std::vector<double> values, double percent);

std::uint64_t fnv1a(const void* data, std::size_t bytes,
                    std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// On-disk cache of reference optimal values, one small file per key.
class ReferenceCache {
 public:
  explicit ReferenceCache(std::string dir);
  static std::string default_dir();
  std::optional<double> load(std::uint64_t key) const;
  void store(std::uint64_t key, double value) const;
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
};

/// Runs fn(0..n-1) on `jobs` threads; the first exception is rethrown.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

// Motivating example -------------------------------------------------------

struct Snapshot {
  int scale = 1;
  std::int64_t iteration = 0;
  Vector nodes;
  Vector values;
};

struct MotivatingRun {
  int S = 0;
  std::string method;
  int trial = 0;
  std::int64_t nanos = 0;
  std::int64_t fine_iters = 0;
  double cost_units = 0.0;
  std::vector<std::int64_t> steps_by_scale;  // entry s-1
  bool lazy = false;
  double reference = 0.0;
  double final_objective = 0.0;
  bool capped = false;  // stopped by fine_cap before reaching 5% of optimal
  SolveTrace trace;                 // kept for trial 0 only
  std::vector<Snapshot> snapshots;  // trial 0 only
};

struct PercentileRow {
  int S = 0;
  std::string method;
  double p5 = 0, p50 = 0, p95 = 0;
};

struct MotivatingResult {
  std::vector<MotivatingRun> runs;
  std::vector<PercentileRow> percentiles;  // of millis
};

MotivatingResult run_motivating(const BenchConfig& config);
void write_motivating(const MotivatingResult& result, const BenchConfig& config);

// Coarse-iteration sweep -----------------------------------------------------

struct SweepRow {
  std::int64_t K_s = 0;
  double median_ms = 0, q1_ms = 0, q3_ms = 0;
  double fine_iters = 0;  // median
};

std::vector<SweepRow> run_coarse_sweep(const BenchConfig& config);
void write_coarse_sweep(const std::vector<SweepRow>& rows, const BenchConfig& config);

// Tucker benchmarks -----------------------------------------------------------

struct TuckerRun {
  std::string method;
  int trial = 0;
  std::int64_t nanos = 0;
  std::int64_t fine_iters = 0;
  std::int64_t total_iters = 0;
  double rel_error = 0.0;
  double mean_rel_error = 0.0;
  double a_error = 0.0;
  double max_ascent = 0.0;     // largest half-step objective increase
  double max_violation = 0.0;  // largest constraint violation
  std::string stop_reason;
};

struct TuckerSummary {
  std::string method;
  int trials = 0;
  double min_ms = 0, median_ms = 0, mean_ms = 0, std_ms = 0;
  std::int64_t peak_bytes = 0;
};

struct TuckerResult {
  std::vector<TuckerRun> runs;
  std::vector<TuckerSummary> summary;
};

TuckerResult run_tucker(const BenchConfig& config);
void write_tucker(const TuckerResult& result, const BenchConfig& config);

/// Estimated peak working set of one factorization (data pyramid, factors
/// and per-iteration buffers).
std::int64_t tucker_peak_bytes(const std::vector<Index>& dims, Index R,
                               bool multiscale, const std::vector<Index>& continuous);

// Bound audit -----------------------------------------------------------------

struct AuditEntry {
  std::string bound;
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  double max_ratio = 0.0;
  std::map<std::string, double> witness;  // parameters of the max-ratio case
};

struct AuditReport {
  std::uint64_t seed = 0;
  std::vector<AuditEntry> entries;
  bool ok() const;
};

/// Randomized instances of every closed-form bound. `trials` applies to
/// the cheap bounds; solver-backed bounds use trials / 50 (at least 20).
AuditReport run_bound_audit(std::int64_t trials, std::uint64_t seed);
std::string audit_json(const AuditReport& report);

// Files -------------------------------------------------------------------------

/// Checks a benchmark output file against its documented schema. Returns
/// the problems found (empty means valid).
std::vector<std::string> validate_file(const std::string& path);

/// Writes the CSV header and rows; throws IoError on failure.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows);

/// Trace as a JSON array of {scale, iter, objective, grad_norm, t_ns, phase}.
std::string trace_json(const SolveTrace& trace);

/// Runs an experiment end to end and writes its files. Returns the exit
/// code (0, or 1 for a failed audit).
int run_experiment(const BenchConfig& config);

}  // namespace msopt::bench
