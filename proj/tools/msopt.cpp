// msopt: benchmark harness and tensor factorization front end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "msopt/bench.hpp"
#include "msopt/error.hpp"
#include "msopt/tucker.hpp"

namespace {

using msopt::bench::BenchConfig;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitAudit = 1;
constexpr int kExitIo = 2;

std::pair<int, int> parse_scales(const std::string& text) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      int s = std::stoi(text);
      return {s, s};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw msopt::InvalidInput("scales must look like a..b or a single integer, got " + text);
  }
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    size_t used = 0;
    unsigned long long v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw msopt::InvalidInput("seed must be an unsigned integer, got " + text);
  }
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw msopt::IoError("cannot open config file " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw msopt::InvalidInput("config file must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw msopt::InvalidInput("config file " + path + ": " + e.what());
  }
}

/// Fields shared by the bench and audit commands. Values are optional so
/// that flags can override the config file.
struct CommonFlags {
  std::string config;
  std::string scales;
  std::optional<int> trials;
  std::string seed;
  std::string plan;
  std::optional<int> jobs;
  std::string out;
  std::string format;
  std::optional<std::int64_t> snapshot_every;
  std::optional<std::int64_t> trace_stride;
  std::optional<std::int64_t> coarse_max;
  std::optional<std::int64_t> fine_cap;
  std::string cache_dir;
  bool no_cache = false;
};

void apply_json(BenchConfig& c, const json& j) {
  auto get_str = [&](const char* k) -> std::optional<std::string> {
    if (!j.contains(k)) return std::nullopt;
    if (j[k].is_string()) return j[k].get<std::string>();
    if (j[k].is_number()) return j[k].dump();
    throw msopt::InvalidInput(std::string("config key ") + k + " has the wrong type");
  };
  try {
    if (auto e = get_str("experiment")) {
      auto ex = msopt::bench::parse_experiment(*e);
      if (!ex) throw msopt::InvalidInput("unknown experiment " + *e);
      c.experiment = *ex;
    }
    if (j.contains("scales")) {
      if (j["scales"].is_array() && j["scales"].size() == 2) {
        c.scale_min = j["scales"][0].get<int>();
        c.scale_max = j["scales"][1].get<int>();
      } else {
        auto [a, b] = parse_scales(*get_str("scales"));
        c.scale_min = a;
        c.scale_max = b;
      }
    }
    if (j.contains("trials")) c.trials = j["trials"].get<int>();
    if (auto s = get_str("seed")) c.seed = parse_seed(*s);
    if (auto p = get_str("plan")) c.plan = msopt::bench::PlanSpec::parse(*p);
    if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
    if (auto o = get_str("out")) c.out_dir = *o;
    if (auto f = get_str("format")) c.format = *f;
    if (j.contains("snapshot_every")) c.snapshot_every = j["snapshot_every"].get<std::int64_t>();
    if (j.contains("trace_stride")) c.trace_stride = j["trace_stride"].get<std::int64_t>();
    if (j.contains("coarse_max")) c.coarse_max = j["coarse_max"].get<std::int64_t>();
    if (j.contains("fine_cap")) c.fine_cap = j["fine_cap"].get<std::int64_t>();
    if (auto d = get_str("cache_dir")) c.cache_dir = *d;
    if (j.contains("cache")) c.use_cache = j["cache"].get<bool>();
  } catch (const json::exception& e) {
    throw msopt::InvalidInput(std::string("config: ") + e.what());
  }
}

BenchConfig resolve(const CommonFlags& f, std::optional<msopt::bench::Experiment> experiment,
                    bool audit) {
  BenchConfig c;
  if (audit) {
    c.experiment = msopt::bench::Experiment::kBoundAudit;
    c.trials = 10000;
  }
  bool seed_set = false;
  if (!f.config.empty()) {
    json j = load_config(f.config);
    apply_json(c, j);
    seed_set = j.contains("seed");
  }
  if (experiment) c.experiment = *experiment;
  if (audit) c.experiment = msopt::bench::Experiment::kBoundAudit;
  if (!f.scales.empty()) {
    auto [a, b] = parse_scales(f.scales);
    c.scale_min = a;
    c.scale_max = b;
  }
  if (f.trials) c.trials = *f.trials;
  if (!f.seed.empty()) {
    c.seed = parse_seed(f.seed);
    seed_set = true;
  }
  if (!seed_set) {
    if (const char* env = std::getenv("MSOPT_SEED"); env && *env) c.seed = parse_seed(env);
  }
  if (!f.plan.empty()) c.plan = msopt::bench::PlanSpec::parse(f.plan);
  if (f.jobs) c.jobs = *f.jobs;
  if (!f.out.empty()) c.out_dir = f.out;
  if (!f.format.empty()) c.format = f.format;
  if (f.snapshot_every) c.snapshot_every = *f.snapshot_every;
  if (f.trace_stride) c.trace_stride = *f.trace_stride;
  if (f.coarse_max) c.coarse_max = *f.coarse_max;
  if (f.fine_cap) c.fine_cap = *f.fine_cap;
  if (!f.cache_dir.empty()) c.cache_dir = f.cache_dir;
  if (f.no_cache) c.use_cache = false;
  c.validate();
  return c;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool audit) {
  cmd->add_option("--config", f.config, "JSON file with default values for these flags");
  cmd->add_option("--trials", f.trials, "Number of trials (audit: random instances per bound)");
  cmd->add_option("--seed", f.seed, "Base seed (falls back to MSOPT_SEED)");
  if (audit) {
    cmd->add_option("--out", f.out, "Report file");
    return;
  }
  cmd->add_option("--scales", f.scales, "Scale range a..b");
  cmd->add_option("--plan", f.plan,
                  "single | greedy-one-per-coarse | greedy-uniform(K) | lazy(K) | progress-driven");
  cmd->add_option("--jobs", f.jobs, "Worker threads for trials");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--format", f.format, "csv or json");
  cmd->add_option("--snapshot-every", f.snapshot_every, "Write every n-th iterate of trial 0");
  cmd->add_option("--trace-stride", f.trace_stride, "Record every n-th iteration in traces");
  cmd->add_option("--coarse-max", f.coarse_max, "Largest K_s in the coarse-iteration sweep");
  cmd->add_option("--fine-cap", f.fine_cap, "Fine-stage iteration cap for motivating runs");
  cmd->add_option("--cache-dir", f.cache_dir, "Reference-optimum cache directory");
  cmd->add_flag("--no-cache", f.no_cache, "Recompute reference optima");
}

std::set<msopt::Index> parse_dims(const std::string& text) {
  std::set<msopt::Index> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      long long d = std::stoll(item);
      if (d < 1) throw std::invalid_argument(item);
      dims.insert(msopt::Index(d - 1));  // 1-based on the command line
    } catch (const std::exception&) {
      throw msopt::InvalidInput("continuous dims must be 1-based integers, got " + item);
    }
  }
  return dims;
}

void write_matrix_csv(const std::string& path, const msopt::Matrix& A) {
  std::ofstream out(path);
  if (!out) throw msopt::IoError("cannot write " + path);
  out.precision(17);
  for (msopt::Index i = 0; i < A.rows(); ++i) {
    for (msopt::Index j = 0; j < A.cols(); ++j) out << (j ? "," : "") << A(i, j);
    out << '\n';
  }
  if (!out) throw msopt::IoError("write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale optimization benchmarks and tools"};
  app.require_subcommand(1);

  CommonFlags bench_flags;
  std::string experiment_name;
  auto* bench = app.add_subcommand("bench", "Run a benchmark experiment");
  bench->add_option("experiment", experiment_name,
                    "motivating | coarse-iters-sweep | tucker-synthetic | tucker-geoshape | bound-audit");
  add_common(bench, bench_flags, false);

  CommonFlags audit_flags;
  auto* audit = app.add_subcommand("audit", "Check every closed-form bound on random instances");
  add_common(audit, audit_flags, true);

  auto* tensor = app.add_subcommand("tensor", "Tucker-1 factorization of a tensor file");
  tensor->require_subcommand(1);
  struct TensorFlags {
    std::string input;
    msopt::Index rank = 3;
    std::string continuous;
    std::optional<double> tol;
    std::optional<double> mre_tol;
    std::optional<double> objective_tol;
    std::optional<double> mre_floor;
    std::int64_t max_iter = 500;
    std::string seed;
    msopt::Index leading = 1;
    std::string out;
    bool subblock = false;
  } tf;
  auto add_tensor = [&](CLI::App* c) {
    c->add_option("--input", tf.input, "Tensor file (MSOT1 binary or CSV)")->required();
    c->add_option("--rank", tf.rank, "Rank R");
    c->add_option("--tol", tf.tol, "Relative error tolerance");
    c->add_option("--mre-tol", tf.mre_tol, "Mean relative error tolerance");
    c->add_option("--mre-floor", tf.mre_floor, "Entries at or below are left out of the mean relative error");
    c->add_option("--objective-tol", tf.objective_tol, "Objective tolerance");
    c->add_option("--max-iter", tf.max_iter, "Iteration cap (per scale for msfactorize)");
    c->add_option("--seed", tf.seed, "Initialization seed (falls back to MSOPT_SEED)");
    c->add_option("--leading-modes", tf.leading, "Core slices are indexed by this many leading modes");
    c->add_option("--out", tf.out, "Output prefix for A.csv and B tensor");
    c->add_flag("--subblock", tf.subblock, "Update the core one component at a time");
  };
  auto* factorize = tensor->add_subcommand("factorize", "Single-scale factorization");
  add_tensor(factorize);
  auto* msfactorize = tensor->add_subcommand("msfactorize", "Multiscale factorization");
  add_tensor(msfactorize);
  msfactorize->add_option("--continuous-dims", tf.continuous, "Comma separated 1-based modes");

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "Check benchmark files against their schemas");
  validate->add_option("files", validate_paths, "Files to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    if (*bench) {
      std::optional<msopt::bench::Experiment> ex;
      if (!experiment_name.empty()) {
        ex = msopt::bench::parse_experiment(experiment_name);
        if (!ex) throw msopt::InvalidInput("unknown experiment " + experiment_name);
      } else if (bench_flags.config.empty()) {
        throw msopt::InvalidInput("bench needs an experiment name or a config file");
      }
      BenchConfig c = resolve(bench_flags, ex, false);
      if (c.jobs > 1) {
        std::cerr << "warning: with --jobs > 1 wall-clock comparisons are advisory\n";
      }
      int code = msopt::bench::run_experiment(c);
      std::cerr << msopt::bench::to_string(c.experiment) << ": wrote results to " << c.out_dir
                << "\n";
      return code;
    }
    if (*audit) {
      BenchConfig c = resolve(audit_flags, std::nullopt, true);
      auto report = msopt::bench::run_bound_audit(c.trials, c.seed);
      std::string text = msopt::bench::audit_json(report);
      if (audit_flags.out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(audit_flags.out);
        if (!out || !(out << text)) throw msopt::IoError("cannot write " + audit_flags.out);
      }
      for (const auto& e : report.entries) {
        std::cerr << e.bound << ": " << e.trials << " trials, max ratio " << e.max_ratio
                  << ", violations " << e.violations << "\n";
      }
      return report.ok() ? kExitOk : kExitAudit;
    }
    if (*tensor) {
      bool multi = bool(*msfactorize);
      msopt::DenseTensor Y = msopt::tucker::read_tensor(tf.input);
      msopt::tucker::Options o;
      o.rel_error_tol = tf.tol;
      o.mean_rel_error_tol = tf.mre_tol;
      o.objective_tol = tf.objective_tol;
      o.mre_floor = tf.mre_floor;
      o.max_iterations = tf.max_iter;
      o.core_leading_modes = tf.leading;
      o.subblock_updates = tf.subblock;
      if (!tf.seed.empty()) {
        o.seed = parse_seed(tf.seed);
      } else if (const char* env = std::getenv("MSOPT_SEED"); env && *env) {
        o.seed = parse_seed(env);
      }
      auto r = multi ? msopt::tucker::multiscale_factorize(Y, tf.rank, parse_dims(tf.continuous), o)
                     : msopt::tucker::bcd_factorize(Y, tf.rank, o);
      json summary = {{"shape", Y.shape_string()},
                      {"rank", tf.rank},
                      {"iterations", r.iterations},
                      {"total_iterations", r.trace.total_steps()},
                      {"stop_reason", r.stop_reason},
                      {"rel_error", r.final_rel_error},
                      {"mean_rel_error", r.final_mean_rel_error},
                      {"objective", r.final_objective},
                      {"millis", double(r.trace.total_ns) * 1e-6}};
      std::cout << summary.dump(1) << "\n";
      if (!tf.out.empty()) {
        write_matrix_csv(tf.out + "A.csv", r.factors.A);
        msopt::tucker::write_tensor(tf.out + "B.msot", r.factors.B);
        std::ofstream tr(tf.out + "trace.json");
        if (!tr || !(tr << msopt::bench::trace_json(r.trace) << "\n")) {
          throw msopt::IoError("cannot write " + tf.out + "trace.json");
        }
      }
      return kExitOk;
    }
    if (*validate) {
      bool ok = true;
      for (const auto& p : validate_paths) {
        auto errs = msopt::bench::validate_file(p);
        for (const auto& e : errs) std::cerr << e << "\n";
        if (errs.empty()) std::cout << p << ": ok\n";
        ok = ok && errs.empty();
      }
      return ok ? kExitOk : kExitIo;
    }
  } catch (const msopt::Error& e) {
    std::cerr << "msopt: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "msopt: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
