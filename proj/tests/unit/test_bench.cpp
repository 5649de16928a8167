#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "msopt/bench.hpp"
#include "msopt/error.hpp"

using namespace msopt;
using namespace msopt::bench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("msopt_bench_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) n += !line.empty();
  return n;
}

}  // namespace

TEST(Percentile, NearestRank) {
  std::vector<double> v = {15, 20, 35, 40, 50};
  EXPECT_EQ(nearest_rank(v, 5), 15);
  EXPECT_EQ(nearest_rank(v, 30), 20);
  EXPECT_EQ(nearest_rank(v, 40), 20);
  EXPECT_EQ(nearest_rank(v, 50), 35);
  EXPECT_EQ(nearest_rank(v, 100), 50);
  EXPECT_EQ(nearest_rank({7}, 95), 7);
  EXPECT_THROW(nearest_rank({}, 50), InvalidInput);
}

TEST(Plan, Parse) {
  EXPECT_EQ(PlanSpec::parse("single").kind, PlanSpec::Kind::kSingle);
  EXPECT_EQ(PlanSpec::parse("greedy-one-per-coarse").kind, PlanSpec::Kind::kGreedyOnePerCoarse);
  PlanSpec u = PlanSpec::parse("greedy-uniform(4)");
  EXPECT_EQ(u.kind, PlanSpec::Kind::kGreedyUniform);
  EXPECT_EQ(u.K, 4);
  EXPECT_EQ(PlanSpec::parse("lazy:7").K, 7);
  EXPECT_EQ(PlanSpec::parse("progress-driven").kind, PlanSpec::Kind::kProgress);
  EXPECT_EQ(PlanSpec::parse(u.name()).K, 4);
  EXPECT_THROW(PlanSpec::parse("lazy(0)"), InvalidInput);
  EXPECT_THROW(PlanSpec::parse("fastest"), InvalidInput);
}

TEST(Config, Validation) {
  BenchConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.scales(), std::make_pair(3, 10));
  c.scale_min = 2;
  EXPECT_THROW(c.validate(), InvalidInput);
  c.scale_min = 5;
  c.scale_max = 21;
  EXPECT_THROW(c.validate(), InvalidInput);
  c.scale_max = 6;
  c.trials = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c.trials = 1;
  c.format = "xml";
  EXPECT_THROW(c.validate(), InvalidInput);
  EXPECT_EQ(parse_experiment("tucker-geoshape"), Experiment::kTuckerGeoshape);
  EXPECT_FALSE(parse_experiment("nope").has_value());
}

TEST(Cache, StoresExactBits) {
  fs::path dir = scratch("cache");
  ReferenceCache c(dir.string());
  EXPECT_FALSE(c.load(42).has_value());
  c.store(42, 0.1 + 0.2);
  ASSERT_TRUE(c.load(42).has_value());
  EXPECT_EQ(*c.load(42), 0.1 + 0.2);
  fs::remove_all(dir);
}

TEST(Parallel, RunsEveryIndexAndRethrows) {
  std::vector<int> hits(50, 0);
  parallel_for(50, 3, [&](int i) { hits[size_t(i)]++; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(5, 2, [](int i) { if (i == 3) throw InvalidInput("x"); }), InvalidInput);
}

TEST(Motivating, SmokeFilesAndRows) {
  fs::path out = scratch("motivating");
  BenchConfig c;
  c.scale_min = 3;
  c.scale_max = 3;
  c.trials = 1;
  c.out_dir = out.string();
  c.snapshot_every = 5;
  c.use_cache = false;
  EXPECT_EQ(run_experiment(c), 0);
  for (const char* f : {"timing.csv", "percentiles.csv", "loss_time.csv", "iterates_S3.csv"}) {
    ASSERT_TRUE(fs::exists(out / f)) << f;
    EXPECT_TRUE(validate_file((out / f).string()).empty()) << f;
  }
  EXPECT_EQ(count_lines(out / "timing.csv"), 3);
  EXPECT_EQ(count_lines(out / "percentiles.csv"), 3);
  EXPECT_EQ(slurp(out / "timing.csv").substr(0, 52),
            "S,method,trial,millis,fine_iters,total_cost_units\n3,");
  fs::remove_all(out);
}

TEST(Motivating, DeterministicApartFromClocks) {
  BenchConfig c;
  c.scale_min = 4;
  c.scale_max = 5;
  c.trials = 2;
  c.use_cache = false;
  MotivatingResult a = run_motivating(c), b = run_motivating(c);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].fine_iters, b.runs[i].fine_iters);
    EXPECT_EQ(a.runs[i].cost_units, b.runs[i].cost_units);
    EXPECT_EQ(a.runs[i].final_objective, b.runs[i].final_objective);
  }
  for (const auto& p : a.percentiles) {
    EXPECT_LE(p.p5, p.p50);
    EXPECT_LE(p.p50, p.p95);
  }
}

TEST(Motivating, JsonFormat) {
  fs::path out = scratch("motivating_json");
  BenchConfig c;
  c.scale_min = 3;
  c.scale_max = 3;
  c.trials = 1;
  c.format = "json";
  c.out_dir = out.string();
  c.use_cache = false;
  EXPECT_EQ(run_experiment(c), 0);
  for (const auto& e : fs::directory_iterator(out)) {
    EXPECT_TRUE(validate_file(e.path().string()).empty()) << e.path();
    if (e.path().filename().string().rfind("trace", 0) == 0) {
      auto j = nlohmann::json::parse(slurp(e.path()));
      ASSERT_TRUE(j.is_array());
      for (const char* k : {"scale", "iter", "objective", "grad_norm", "t_ns", "phase"}) {
        EXPECT_TRUE(j[0].contains(k)) << k;
      }
    }
  }
  fs::remove_all(out);
}

TEST(Sweep, Smoke) {
  fs::path out = scratch("sweep");
  BenchConfig c;
  c.experiment = Experiment::kCoarseSweep;
  c.scale_min = c.scale_max = 4;
  c.trials = 1;
  c.coarse_max = 3;
  c.out_dir = out.string();
  EXPECT_EQ(run_experiment(c), 0);
  EXPECT_TRUE(validate_file((out / "sweep.csv").string()).empty());
  EXPECT_EQ(count_lines(out / "sweep.csv"), 4);
  EXPECT_NE(slurp(out / "sweep.csv").find("\n1,"), std::string::npos);
  fs::remove_all(out);
}

TEST(Tucker, Smoke) {
  fs::path out = scratch("tucker");
  BenchConfig c;
  c.experiment = Experiment::kTuckerSynthetic;
  c.scale_min = c.scale_max = 4;
  c.trials = 1;
  c.out_dir = out.string();
  EXPECT_EQ(run_experiment(c), 0);
  EXPECT_TRUE(validate_file((out / "tucker_summary.csv").string()).empty());
  EXPECT_TRUE(validate_file((out / "tucker_trials.csv").string()).empty());
  EXPECT_EQ(count_lines(out / "tucker_summary.csv"), 3);
  fs::remove_all(out);
}

TEST(Audit, DeterministicReport) {
  AuditReport a = run_bound_audit(200, 9), b = run_bound_audit(200, 9);
  EXPECT_EQ(audit_json(a), audit_json(b));
  auto j = nlohmann::json::parse(audit_json(a));
  EXPECT_EQ(j["seed"], 9);
  EXPECT_GE(a.entries.size(), 8u);
  for (const auto& e : a.entries) EXPECT_GT(e.trials, 0) << e.bound;
}

TEST(Validate, RejectsBrokenFiles) {
  fs::path dir = scratch("validate");
  write_csv((dir / "percentiles.csv").string(), "S,method,p5,p50,p95", {"3,single,2,1,3"});
  EXPECT_FALSE(validate_file((dir / "percentiles.csv").string()).empty());
  write_csv((dir / "timing.csv").string(), "S,method,trial", {"3,single,0"});
  EXPECT_FALSE(validate_file((dir / "timing.csv").string()).empty());
  write_csv((dir / "sweep.csv").string(), "K_s,median_time,q1,q3,fine_iters", {"1,x,1,2,3"});
  EXPECT_FALSE(validate_file((dir / "sweep.csv").string()).empty());
  EXPECT_FALSE(validate_file((dir / "nothing.csv").string()).empty());
  fs::remove_all(dir);
}

TEST(Validate, UnwritableDirectoryIsAnIoError) {
  BenchConfig c;
  c.scale_min = c.scale_max = 3;
  c.trials = 1;
  c.use_cache = false;
  c.out_dir = "/proc/msopt-cannot-write";
  try {
    run_experiment(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}
