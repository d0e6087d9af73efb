#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kaczmarz/bench.hpp"
#include "kaczmarz/datagen.hpp"
#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/matrix_io.hpp"
#include "kaczmarz/paving.hpp"
#include "kaczmarz/rng.hpp"
#include "kaczmarz/row_clustering.hpp"
#include "kaczmarz/solvers.hpp"

namespace {

namespace kz = kaczmarz;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GlobalArgs {
  std::uint64_t seed = 0;
  fs::path out = ".";
  std::string format = "csv";
};

kz::datagen::MatrixFormat parse_format(const std::string& format) {
  if (format == "csv") return kz::datagen::MatrixFormat::Csv;
  if (format == "binary") return kz::datagen::MatrixFormat::Binary;
  throw kz::DimensionError("unknown --format " + format +
                           " (expected csv or binary)");
}

kz::solvers::GuardRule parse_guard(const std::string& guard) {
  if (guard == "fresh-sample") return kz::solvers::GuardRule::FreshSample;
  if (guard == "fixed-first-row") return kz::solvers::GuardRule::FixedFirstRow;
  throw kz::DimensionError("unknown --guard " + guard +
                           " (expected fresh-sample or fixed-first-row)");
}

struct SolverFlags {
  std::string method = "rka";
  std::size_t max_iters = 10000;
  double tol = 1e-6;
  std::size_t trace_every = 1;
  std::size_t sample_count = 0;
  std::size_t jl_dim = 0;
  std::size_t clusters = 4;
  std::size_t block_size = 4;
  std::string guard = "fresh-sample";
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f, bool with_method) {
  if (with_method)
    cmd->add_option("--method", f.method,
                    "classical | rka | rka-jl | rka-cluster-jl | rka-block | "
                    "rka-cluster-block");
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap");
  cmd->add_option("--tol", f.tol, "Relative residual stopping tolerance");
  cmd->add_option("--trace-every", f.trace_every,
                  "Iterations between trace records");
  cmd->add_option("--sample-count", f.sample_count,
                  "Rows sampled per JL selection (0 = min(p, n))");
  cmd->add_option("--jl-dim", f.jl_dim, "Sketch dimension (0 = default)");
  cmd->add_option("--clusters", f.clusters, "Cluster count k");
  cmd->add_option("--block-size", f.block_size, "Rows per random block");
  cmd->add_option("--guard", f.guard, "fresh-sample | fixed-first-row");
}

kz::solvers::SolverConfig to_config(const SolverFlags& f, std::uint64_t seed) {
  const auto method = kz::solvers::parse_method(f.method);
  if (!method) throw kz::DimensionError("unknown --method " + f.method);
  kz::solvers::SolverConfig cfg;
  cfg.method = *method;
  cfg.max_iters = f.max_iters;
  cfg.residual_tol = f.tol;
  cfg.trace_every = f.trace_every;
  cfg.sample_count = f.sample_count;
  cfg.jl_dim = f.jl_dim;
  cfg.cluster_count = f.clusters;
  cfg.block_size = f.block_size;
  cfg.guard = parse_guard(f.guard);
  cfg.seed = seed;
  return cfg;
}

std::string optional_field(const std::optional<double>& v) {
  return v ? kz::format_double(*v) : std::string();
}

int cmd_datagen(const GlobalArgs& g, const kz::datagen::GenSpec& spec_in,
                bool out_given) {
  if (!out_given)
    throw kz::DimensionError("datagen requires --out <directory>");
  kz::datagen::GenSpec spec = spec_in;
  spec.seed = g.seed;
  spec.validate();
  const kz::datagen::GeneratedSystem gen = kz::datagen::gen_instance(spec);
  kz::datagen::write_instance(g.out, gen, spec, parse_format(g.format));
  std::cout << g.out.string() << '\n';
  return kExitOk;
}

int cmd_solve(const GlobalArgs& g, const SolverFlags& flags,
              const fs::path& instance_dir) {
  const kz::solvers::SolverConfig cfg = to_config(flags, g.seed);
  const kz::datagen::Instance inst = kz::datagen::read_instance(instance_dir);
  const kz::solvers::SolverState st = kz::solvers::solve(inst.system, cfg);
  fs::create_directories(g.out);
  const fs::path trace_path = g.out / ("trace_" + flags.method + ".csv");
  kz::solvers::write_trace_csv(st.trace, trace_path);
  const kz::bench::RunSummary summary =
      kz::bench::summarize_trace(st.trace, cfg.residual_tol);
  std::cerr << "trace written to " << trace_path.string() << " (measured "
            << st.trace.back().wall_nanos << " ns)\n";
  std::cout << "method,iters,final_residual,final_error,rows_touched,"
               "wall_nanos\n";
  std::cout << flags.method << ',' << summary.iterations << ','
            << kz::format_double(summary.final_residual) << ','
            << optional_field(summary.final_error) << ','
            << summary.total_rows_touched << ",0\n";
  return kExitOk;
}

int cmd_bench(const GlobalArgs& g, const fs::path& spec_file,
              const kz::datagen::GenSpec& gen, const SolverFlags& shared,
              const std::vector<std::string>& methods, std::size_t reps,
              bool resume) {
  kz::bench::ExperimentSpec spec;
  if (!spec_file.empty()) {
    spec = kz::bench::read_experiment_json(spec_file);
  } else {
    if (methods.empty())
      throw kz::DimensionError("bench requires --methods or --spec");
    spec.gen = gen;
    spec.gen.seed = g.seed;
    spec.repetitions = reps;
    for (const std::string& name : methods) {
      SolverFlags f = shared;
      f.method = name;
      spec.methods.push_back({name, to_config(f, g.seed)});
    }
  }
  spec.output_dir = g.out;
  const std::vector<kz::bench::RunRecord> records =
      kz::bench::run_bench(spec, resume);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.failed ? 1 : 0;
  std::cout << "summary written to "
            << (spec.output_dir / "summary.csv").string() << " (" << records.size()
            << " runs, " << failed << " failed)\n";
  return failed == 0 ? kExitOk : kExitRuntime;
}

struct AuditShapeFlags {
  std::size_t trials = 1000;
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t p_min = 10;
  std::size_t p_max = 100;
  std::size_t k_fixed = 0;
  std::size_t p_fixed = 0;
};

kz::bench::AuditConfig to_audit_config(const AuditShapeFlags& f,
                                       std::uint64_t seed) {
  kz::bench::AuditConfig cfg;
  cfg.trials = f.trials;
  cfg.seed = seed;
  cfg.k_min = f.k_fixed ? f.k_fixed : f.k_min;
  cfg.k_max = f.k_fixed ? f.k_fixed : f.k_max;
  cfg.p_min = f.p_fixed ? f.p_fixed : f.p_min;
  cfg.p_max = f.p_fixed ? f.p_fixed : f.p_max;
  return cfg;
}

int report_audit(const std::string& name, const kz::bench::AuditOutcome& out,
                 const fs::path& csv) {
  std::cout << name << ": " << out.trials << " trials, " << out.applicable
            << " applicable, " << out.violations << " violations";
  if (out.paper_flag_violations)
    std::cout << " (paper-form flag raised " << out.paper_flag_violations
              << " times, report-only)";
  std::cout << "; per-trial data in " << csv.string() << '\n';
  return out.violations == 0 ? kExitOk : kExitRuntime;
}

int cmd_audit_thm1(const GlobalArgs& g, std::size_t d, double eps, double delta,
                   std::size_t trials) {
  const kz::paving::OrthogonalityExperiment r =
      kz::paving::orthogonality_probability_experiment(d, eps, delta, trials,
                                                       g.seed);
  fs::create_directories(g.out);
  const fs::path csv = g.out / "audit_thm1.csv";
  {
    std::ofstream f(csv);
    if (!f) throw kz::IoError("cannot write " + csv.string());
    f << "d,eps,delta,trials,empirical_fraction,structural_lower_bound,"
         "standard_error,passes\n";
    f << d << ',' << kz::format_double(eps) << ',' << kz::format_double(delta)
      << ',' << trials << ',' << kz::format_double(r.empirical_fraction) << ','
      << kz::format_double(r.structural_lower_bound) << ','
      << kz::format_double(r.standard_error) << ',' << (r.passes ? 1 : 0)
      << '\n';
  }
  std::cout << "thm1: empirical " << kz::format_double(r.empirical_fraction)
            << " vs bound " << kz::format_double(r.structural_lower_bound)
            << (r.passes ? " (passes)" : " (FAILS)") << '\n';
  return r.passes ? kExitOk : kExitRuntime;
}

int cmd_audit_lemma1(const GlobalArgs& g, std::size_t n, std::size_t p,
                     std::size_t block_size, double noise, std::size_t runs,
                     std::size_t horizon) {
  kz::LinearSystem sys = kz::datagen::gen_gaussian_system(n, p, g.seed);
  sys = kz::normalize_system_rows(sys);
  if (noise > 0.0) sys = kz::datagen::add_noise(sys, noise, g.seed);
  const kz::paving::RowPaving paving = kz::paving::build_random_paving(
      sys.A, block_size, kz::derive_seed(g.seed, 1));
  const kz::bench::Lemma1Experiment exp = kz::bench::lemma1_experiment(
      sys, paving, runs, horizon, kz::derive_seed(g.seed, 2));

  fs::create_directories(g.out);
  const fs::path csv = g.out / "audit_lemma1.csv";
  {
    std::ofstream f(csv);
    if (!f) throw kz::IoError("cannot write " + csv.string());
    f << "j,mean_err_sq,se_err_sq,recursion_rhs\n";
    for (std::size_t j = 0; j < exp.mean_err_sq.size(); ++j) {
      f << j << ',' << kz::format_double(exp.mean_err_sq[j]) << ','
        << kz::format_double(exp.se_err_sq[j]) << ',';
      if (j > 0)
        f << kz::format_double(exp.bound.coefficient * exp.mean_err_sq[j - 1] +
                               exp.bound.per_step_noise +
                               3.0 * exp.se_err_sq[j]);
      f << '\n';
    }
  }
  std::cout << "lemma1: coefficient "
            << kz::format_double(exp.bound.coefficient) << ", per-step noise "
            << kz::format_double(exp.bound.per_step_noise) << ", "
            << exp.recursion_violations << " recursion violations over "
            << horizon << " steps; per-step data in " << csv.string() << '\n';
  return exp.recursion_violations == 0 ? kExitOk : kExitRuntime;
}

int cmd_audit_paving_quality(const GlobalArgs& g, const fs::path& instance_dir,
                             std::size_t clusters, std::size_t paving_seeds) {
  const kz::datagen::Instance inst = kz::datagen::read_instance(instance_dir);
  std::size_t k = clusters;
  if (k == 0) k = inst.spec ? inst.spec->k : 4;
  const kz::clustering::RowClustering clu = kz::clustering::cluster_rows(
      inst.system.A, inst.system.b, k, kz::derive_seed(g.seed, 1), 100);
  const kz::bench::PavingQuality q = kz::bench::paving_quality_experiment(
      inst.system.A, clu, paving_seeds, kz::derive_seed(g.seed, 2));
  fs::create_directories(g.out);
  const fs::path csv = g.out / "paving_quality.csv";
  kz::bench::write_paving_quality_csv(q, csv);
  std::cout << "paving-quality: clustered median cond "
            << kz::format_double(q.median_clustered_cond) << " vs random "
            << kz::format_double(q.median_random_cond)
            << "; clustered median spectral norm "
            << kz::format_double(q.median_clustered_spectral) << " vs random "
            << kz::format_double(q.median_random_spectral)
            << "; per-block data in " << csv.string() << '\n';
  const bool holds = q.median_clustered_cond <= q.median_random_cond &&
                     q.median_clustered_spectral <= q.median_random_spectral;
  return holds ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kaczmarz solver benchmark toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--seed", g.seed, "Base seed for all randomness");
  const auto* out_opt =
      app.add_option("--out", g.out, "Output directory");
  app.add_option("--format", g.format, "Matrix file format: csv | binary");

  // datagen
  kz::datagen::GenSpec gen;
  gen.n = 0;
  gen.p = 0;
  gen.k = 4;
  auto* dg = app.add_subcommand("datagen",
                                "Generate a synthetic clustered instance");
  dg->add_option("--n", gen.n, "Rows")->required();
  dg->add_option("--p", gen.p, "Columns")->required();
  dg->add_option("--k", gen.k, "Generating cluster count");
  dg->add_option("--spread", gen.spread, "Within-cluster angular spread");
  dg->add_option("--noise", gen.noise_sigma, "Gaussian noise sigma on b");

  // solve
  SolverFlags solve_flags;
  fs::path instance_dir;
  auto* sv = app.add_subcommand("solve", "Run one solver on an instance");
  sv->add_option("--instance", instance_dir, "Instance directory")->required();
  add_solver_flags(sv, solve_flags, true);

  // bench
  SolverFlags bench_flags;
  kz::datagen::GenSpec bench_gen;
  bench_gen.n = 2000;
  bench_gen.p = 200;
  bench_gen.k = 4;
  bench_gen.noise_sigma = 0.1;
  fs::path spec_file;
  std::vector<std::string> bench_methods;
  std::size_t reps = 1;
  bool resume = false;
  auto* bn = app.add_subcommand(
      "bench", "Run a method comparison with matched per-repetition seeds");
  bn->add_option("--spec", spec_file, "JSON experiment file");
  bn->add_option("--methods", bench_methods, "Methods to compare")
      ->delimiter(',');
  bn->add_option("--reps", reps, "Repetitions");
  bn->add_option("--n", bench_gen.n, "Rows");
  bn->add_option("--p", bench_gen.p, "Columns");
  bn->add_option("--k", bench_gen.k, "Generating cluster count");
  bn->add_option("--spread", bench_gen.spread, "Within-cluster spread");
  bn->add_option("--noise", bench_gen.noise_sigma, "Noise sigma");
  bn->add_flag("--resume", resume, "Skip runs whose trace file exists");
  add_solver_flags(bn, bench_flags, false);

  // audit
  auto* au = app.add_subcommand("audit", "Bound checks and paving quality");
  au->require_subcommand(1);
  au->fallthrough();

  std::size_t thm1_d = 2000;
  double thm1_eps = 0.2;
  double thm1_delta = 0.5;
  std::size_t thm1_trials = 20000;
  auto* a1 = au->add_subcommand("thm1", "Near-orthogonality Monte Carlo");
  a1->add_option("--d", thm1_d, "Ambient dimension");
  a1->add_option("--eps", thm1_eps, "Cosine threshold");
  a1->add_option("--delta", thm1_delta, "Norm concentration slack");
  a1->add_option("--trials", thm1_trials, "Sample pairs");

  AuditShapeFlags shape;
  auto* a2 = au->add_subcommand("thm2", "Spectral upper bound audit");
  auto* a3 = au->add_subcommand("thm3", "Spectral lower bound audit");
  auto* a45 = au->add_subcommand("thm45", "Smallest-eigenvalue and condition "
                                          "number audit");
  for (CLI::App* cmd : {a2, a3, a45}) {
    cmd->add_option("--trials", shape.trials, "Random matrices");
    cmd->add_option("--k", shape.k_fixed, "Fix the row count");
    cmd->add_option("--p", shape.p_fixed, "Fix the column count");
    cmd->add_option("--k-min", shape.k_min, "Smallest row count");
    cmd->add_option("--k-max", shape.k_max, "Largest row count");
    cmd->add_option("--p-min", shape.p_min, "Smallest column count");
    cmd->add_option("--p-max", shape.p_max, "Largest column count");
  }

  std::size_t l1_n = 100, l1_p = 20, l1_block = 4, l1_runs = 500,
              l1_horizon = 200;
  double l1_noise = 0.1;
  auto* al = au->add_subcommand("lemma1", "Block convergence bound audit");
  al->add_option("--n", l1_n, "Rows");
  al->add_option("--p", l1_p, "Columns");
  al->add_option("--block-size", l1_block, "Rows per block");
  al->add_option("--noise", l1_noise, "Noise sigma");
  al->add_option("--runs", l1_runs, "Monte Carlo runs");
  al->add_option("--horizon", l1_horizon, "Iterations per run");

  fs::path pq_instance;
  std::size_t pq_clusters = 0;
  std::size_t pq_seeds = 50;
  auto* ap = au->add_subcommand("paving-quality",
                                "Clustered vs random paving spectra");
  ap->add_option("--instance", pq_instance, "Instance directory")->required();
  ap->add_option("--clusters", pq_clusters,
                 "Cluster count (default: instance spec, else 4)");
  ap->add_option("--paving-seeds", pq_seeds, "Paving seeds per type");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (dg->parsed()) return cmd_datagen(g, gen, out_opt->count() > 0);
    if (sv->parsed()) return cmd_solve(g, solve_flags, instance_dir);
    if (bn->parsed())
      return cmd_bench(g, spec_file, bench_gen, bench_flags, bench_methods,
                       reps, resume);
    if (au->parsed()) {
      if (a1->parsed())
        return cmd_audit_thm1(g, thm1_d, thm1_eps, thm1_delta, thm1_trials);
      const kz::bench::AuditConfig cfg = to_audit_config(shape, g.seed);
      fs::create_directories(g.out);
      if (a2->parsed())
        return report_audit(
            "thm2", kz::bench::audit_thm2(cfg, g.out / "audit_thm2.csv"),
            g.out / "audit_thm2.csv");
      if (a3->parsed())
        return report_audit(
            "thm3", kz::bench::audit_thm3(cfg, g.out / "audit_thm3.csv"),
            g.out / "audit_thm3.csv");
      if (a45->parsed())
        return report_audit(
            "thm45", kz::bench::audit_thm45(cfg, g.out / "audit_thm45.csv"),
            g.out / "audit_thm45.csv");
      if (al->parsed())
        return cmd_audit_lemma1(g, l1_n, l1_p, l1_block, l1_noise, l1_runs,
                                l1_horizon);
      if (ap->parsed())
        return cmd_audit_paving_quality(g, pq_instance, pq_clusters, pq_seeds);
    }
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const kz::DimensionError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const kz::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
