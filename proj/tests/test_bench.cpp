#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kaczmarz/bench.hpp"
#include "kaczmarz/datagen.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/paving.hpp"
#include "kaczmarz/rng.hpp"
#include "kaczmarz/solvers.hpp"

namespace kz = kaczmarz;
namespace bn = kaczmarz::bench;
namespace sv = kaczmarz::solvers;
namespace fs = std::filesystem;

namespace {

sv::TraceRecord rec(std::size_t iter, double residual, std::uint64_t rows) {
  sv::TraceRecord r;
  r.iteration = iter;
  r.residual = residual;
  r.rows_touched = rows;
  r.selected = iter == 0 ? -1 : static_cast<std::int64_t>(iter % 3);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("summarize_trace fields") {
  const std::vector<sv::TraceRecord> trace{
      rec(0, 1.0, 0), rec(5, 0.1, 50), rec(10, 0.004, 100),
      rec(15, 0.002, 150)};
  const bn::RunSummary s = bn::summarize_trace(trace, 0.005);
  CHECK(s.iters_to_tol == 10);  // first record at or below tol
  CHECK(s.iterations == 15);
  CHECK(s.final_residual == 0.002);
  CHECK(s.total_rows_touched == 150);

  // Tolerance never reached: iters_to_tol falls back to the last iteration.
  const bn::RunSummary miss = bn::summarize_trace(trace, 1e-9);
  CHECK(miss.iters_to_tol == 15);
}

TEST_CASE("residual_at_iteration uses step semantics") {
  const std::vector<sv::TraceRecord> trace{rec(0, 1.0, 0), rec(10, 0.5, 1),
                                           rec(20, 0.25, 2)};
  CHECK(bn::residual_at_iteration(trace, 0) == 1.0);
  CHECK(bn::residual_at_iteration(trace, 9) == 1.0);
  CHECK(bn::residual_at_iteration(trace, 10) == 0.5);
  CHECK(bn::residual_at_iteration(trace, 19) == 0.5);
  CHECK(bn::residual_at_iteration(trace, 500) == 0.25);  // carried forward
  CHECK_THROWS_AS(bn::residual_at_iteration({}, 3), kz::DimensionError);
}

TEST_CASE("median handles odd and even counts") {
  CHECK(bn::median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(bn::median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(bn::median({7.5}) == 7.5);
  CHECK_THROWS_AS(bn::median({}), kz::DimensionError);
}

TEST_CASE("iters_to_floor finds the plateau entry point") {
  // Residual decays to a noisy plateau around 0.1 from iteration 40 on.
  std::vector<sv::TraceRecord> trace{rec(0, 1.0, 0)};
  for (std::size_t i = 10; i <= 200; i += 10) {
    const double plateau = (i % 20 == 0) ? 0.11 : 0.09;
    const double value = i < 40 ? 10.0 / static_cast<double>(i) : plateau;
    trace.push_back(rec(i, value, i));
  }
  // Tail median is about 0.1; the first dip below 1.1 * floor is at 40.
  CHECK(bn::iters_to_floor(trace, 0.2) == 40);
}

TEST_CASE("median_curve carries early stoppers forward") {
  // Three runs; the second stops at iteration 10 with residual 0.2.
  std::vector<std::vector<sv::TraceRecord>> traces;
  traces.push_back({rec(0, 1.0, 0), rec(10, 0.8, 1), rec(20, 0.6, 2)});
  traces.push_back({rec(0, 1.0, 0), rec(10, 0.2, 1)});
  traces.push_back({rec(0, 1.0, 0), rec(10, 0.5, 1), rec(20, 0.1, 2)});
  const bn::Curve c = bn::median_curve(traces);
  REQUIRE(c.iterations == std::vector<std::size_t>{0, 10, 20});
  CHECK(c.median_residual[0] == 1.0);
  CHECK(c.median_residual[1] == 0.5);
  // At 20: values are 0.6, 0.2 (carried), 0.1 -> median 0.2.
  CHECK(c.median_residual[2] == 0.2);
}

TEST_CASE("run_bench produces matched seeds and sorted records") {
  bn::ExperimentSpec spec;
  spec.gen = kz::datagen::GenSpec{30, 6, 2, 0.1, 0.05, 19};
  spec.repetitions = 2;
  spec.output_dir = fresh_dir("kz_test_bench_run");
  sv::SolverConfig base;
  base.max_iters = 50;
  base.residual_tol = 1e-300;
  base.trace_every = 10;
  base.block_size = 3;
  base.cluster_count = 2;
  for (const char* name : {"rka", "rka-block"}) {
    bn::MethodSpec m;
    m.name = name;
    m.config = base;
    m.config.method = *sv::parse_method(name);
    spec.methods.push_back(m);
  }

  const std::vector<bn::RunRecord> records = bn::run_bench(spec);
  REQUIRE(records.size() == 4);
  // Sorted by (method listed order, repetition).
  CHECK(records[0].method == "rka");
  CHECK(records[0].repetition == 0);
  CHECK(records[1].method == "rka");
  CHECK(records[1].repetition == 1);
  CHECK(records[2].method == "rka-block");
  // Matched seeding: same repetition, same solver seed across methods.
  CHECK(records[0].seed == records[2].seed);
  CHECK(records[1].seed == records[3].seed);
  CHECK(records[0].seed != records[1].seed);

  for (const bn::RunRecord& r : records) {
    CHECK(!r.failed);
    CHECK(fs::exists(r.trace_path));
  }
  CHECK(fs::exists(spec.output_dir / "summary.csv"));
  CHECK(fs::exists(spec.output_dir / "curve_rka.csv"));
  CHECK(fs::exists(spec.output_dir / "curve_rka-block.csv"));

  const std::vector<std::string> lines =
      read_lines(spec.output_dir / "summary.csv");
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] ==
        "method,repetition,seed,iters_to_tol,iterations,final_residual,"
        "final_error,rows_touched,wall_nanos,status,trace_file");
  // wall_nanos column is always 0 for reproducible output.
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream ss(lines[i]);
    std::string field;
    for (int f = 0; f < 9; ++f) std::getline(ss, field, ',');
    CHECK(field == "0");
  }
  fs::remove_all(spec.output_dir);
}

TEST_CASE("run_bench resume reuses existing traces") {
  bn::ExperimentSpec spec;
  spec.gen = kz::datagen::GenSpec{24, 5, 2, 0.1, 0.0, 29};
  spec.repetitions = 1;
  spec.output_dir = fresh_dir("kz_test_bench_resume");
  bn::MethodSpec m;
  m.name = "classical";
  m.config.method = sv::Method::Classical;
  m.config.max_iters = 30;
  m.config.residual_tol = 1e-300;
  spec.methods.push_back(m);

  const std::vector<bn::RunRecord> first = bn::run_bench(spec);
  REQUIRE(first.size() == 1);
  const auto stamp = fs::last_write_time(first[0].trace_path);

  const std::vector<bn::RunRecord> second = bn::run_bench(spec, true);
  CHECK(fs::last_write_time(second[0].trace_path) == stamp);
  CHECK(second[0].summary.final_residual == first[0].summary.final_residual);
  fs::remove_all(spec.output_dir);
}

TEST_CASE("run_bench records failures and keeps going") {
  bn::ExperimentSpec spec;
  spec.gen = kz::datagen::GenSpec{12, 4, 2, 0.1, 0.0, 31};
  spec.repetitions = 1;
  spec.output_dir = fresh_dir("kz_test_bench_fail");
  bn::MethodSpec bad;
  bad.name = "rka-jl";
  bad.config.method = sv::Method::RkaJl;
  bad.config.sample_count = 500;  // more than n: DimensionError
  bn::MethodSpec good;
  good.name = "rka";
  good.config.method = sv::Method::Rka;
  good.config.max_iters = 20;
  spec.methods = {bad, good};

  const std::vector<bn::RunRecord> records = bn::run_bench(spec);
  REQUIRE(records.size() == 2);
  CHECK(records[0].failed);
  CHECK(!records[0].error.empty());
  CHECK(!records[1].failed);

  const std::vector<std::string> lines =
      read_lines(spec.output_dir / "summary.csv");
  bool saw_failed = false;
  for (const std::string& line : lines)
    if (line.find("failed") != std::string::npos) saw_failed = true;
  CHECK(saw_failed);
  fs::remove_all(spec.output_dir);
}

TEST_CASE("experiment json round trip") {
  const fs::path dir = fresh_dir("kz_test_bench_json");
  const fs::path file = dir / "exp.json";
  {
    std::ofstream out(file);
    out << R"({
      "gen": {"n": 50, "p": 10, "k": 3, "spread": 0.2, "noise_sigma": 0.1,
              "seed": 7},
      "methods": [
        {"method": "rka", "max_iters": 200},
        {"method": "rka-jl", "name": "jl-fixed", "guard": "fixed-first-row",
         "sample_count": 8, "jl_dim": 6},
        {"method": "rka-cluster-block", "cluster_count": 3, "trace_every": 5}
      ],
      "repetitions": 4,
      "output_dir": "somewhere"
    })";
  }
  const bn::ExperimentSpec spec = bn::read_experiment_json(file);
  CHECK(spec.gen.n == 50);
  CHECK(spec.gen.p == 10);
  CHECK(spec.gen.k == 3);
  CHECK(spec.gen.spread == 0.2);
  CHECK(spec.gen.noise_sigma == 0.1);
  CHECK(spec.gen.seed == 7);
  CHECK(spec.repetitions == 4);
  CHECK(spec.output_dir == fs::path("somewhere"));
  REQUIRE(spec.methods.size() == 3);
  CHECK(spec.methods[0].name == "rka");
  CHECK(spec.methods[0].config.max_iters == 200);
  CHECK(spec.methods[1].name == "jl-fixed");
  CHECK(spec.methods[1].config.guard == sv::GuardRule::FixedFirstRow);
  CHECK(spec.methods[1].config.sample_count == 8);
  CHECK(spec.methods[1].config.jl_dim == 6);
  CHECK(spec.methods[2].config.cluster_count == 3);
  CHECK(spec.methods[2].config.trace_every == 5);

  {
    std::ofstream out(file);
    out << "{ not json";
  }
  CHECK_THROWS_AS(bn::read_experiment_json(file), kz::IoError);
  CHECK_THROWS_AS(bn::read_experiment_json(dir / "absent.json"), kz::IoError);
  fs::remove_all(dir);
}

TEST_CASE("experiment validation rejects duplicates and empties") {
  bn::ExperimentSpec spec;
  spec.gen = kz::datagen::GenSpec{10, 4, 2, 0.1, 0.0, 1};
  CHECK_THROWS_AS(spec.validate(), kz::DimensionError);  // no methods
  bn::MethodSpec m;
  m.name = "rka";
  spec.methods = {m, m};
  CHECK_THROWS_AS(spec.validate(), kz::DimensionError);  // duplicate names
  spec.methods = {m};
  spec.repetitions = 0;
  CHECK_THROWS_AS(spec.validate(), kz::DimensionError);
}

TEST_CASE("audit outcomes count applicability correctly on tiny runs") {
  const fs::path dir = fresh_dir("kz_test_bench_audit");
  bn::AuditConfig cfg;
  cfg.trials = 40;
  cfg.seed = 3;
  cfg.k_min = 2;
  cfg.k_max = 4;
  cfg.p_min = 12;
  cfg.p_max = 30;
  const bn::AuditOutcome t2 = bn::audit_thm2(cfg, dir / "t2.csv");
  CHECK(t2.trials == 40);
  CHECK(t2.violations == 0);
  const std::vector<std::string> lines = read_lines(dir / "t2.csv");
  CHECK(lines.size() == 41);
  CHECK(lines[0] == "trial,k,p,ov,spectral,bound,holds");

  const bn::AuditOutcome t3 = bn::audit_thm3(cfg, dir / "t3.csv");
  CHECK(t3.violations == 0);
  CHECK(t3.applicable == 40);  // cone rows are always applicable

  const bn::AuditOutcome t45 = bn::audit_thm45(cfg, dir / "t45.csv");
  CHECK(t45.violations == 0);
  CHECK(t45.applicable <= 40);
  fs::remove_all(dir);
}

TEST_CASE("lemma1_experiment respects the bound on a well-posed system") {
  kz::LinearSystem sys = kz::datagen::gen_gaussian_system(40, 8, 51);
  sys = kz::normalize_system_rows(sys);
  sys = kz::datagen::add_noise(sys, 0.05, 52);
  const kz::paving::RowPaving paving =
      kz::paving::build_random_paving(sys.A, 4, 53);
  const bn::Lemma1Experiment exp =
      bn::lemma1_experiment(sys, paving, 60, 40, 54);
  CHECK(exp.runs == 60);
  REQUIRE(exp.mean_err_sq.size() == 41);
  REQUIRE(exp.se_err_sq.size() == 41);
  // Iteration 0 is the deterministic starting distance.
  CHECK(exp.se_err_sq[0] == 0.0);
  CHECK(exp.mean_err_sq[0] > 0.0);
  CHECK(exp.recursion_violations == 0);
  CHECK(exp.bound.coefficient > 0.0);
  CHECK(exp.bound.coefficient < 1.0);
  CHECK_THROWS_AS(bn::lemma1_experiment(sys, paving, 1, 10, 1),
                  kz::DimensionError);
}

TEST_CASE("paving_quality_experiment pools blocks across seeds") {
  const kz::datagen::GenSpec spec{48, 10, 4, 0.05, 0.0, 61};
  const kz::datagen::GeneratedSystem gen = kz::datagen::gen_instance(spec);
  const kz::clustering::RowClustering c =
      kz::clustering::cluster_rows(gen.system.A, gen.system.b, 4, 62);
  const bn::PavingQuality q =
      bn::paving_quality_experiment(gen.system.A, c, 5, 63);
  // 5 seeds x 12 blocks per paving (48 rows / 4 per block).
  CHECK(q.clustered_cond.size() == 60);
  CHECK(q.random_cond.size() == 60);
  CHECK(q.clustered_spectral.size() == q.clustered_cond.size());
  // Tight 4-direction geometry: clustered pavings are far better set.
  CHECK(q.median_clustered_cond < q.median_random_cond);
  CHECK(q.median_clustered_spectral < q.median_random_spectral);

  const fs::path dir = fresh_dir("kz_test_bench_pq");
  bn::write_paving_quality_csv(q, dir / "pq.csv");
  const std::vector<std::string> lines = read_lines(dir / "pq.csv");
  CHECK(lines[0] == "paving,cond,spectral_norm");
  CHECK(lines.size() == 1 + 120);
  fs::remove_all(dir);
}
