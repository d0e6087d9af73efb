#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kaczmarz/datagen.hpp"
#include "kaczmarz/paving.hpp"
#include "kaczmarz/solvers.hpp"

namespace kaczmarz::bench {

struct MethodSpec {
  std::string name;
  solvers::SolverConfig config;
};

struct ExperimentSpec {
  datagen::GenSpec gen;
  std::vector<MethodSpec> methods;
  std::size_t repetitions = 1;
  std::filesystem::path output_dir;

  void validate() const;
};

struct RunSummary {
  /// First traced iteration at or below residual_tol; equal to iterations
  /// when the tolerance was never reached.
  std::size_t iters_to_tol = 0;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  std::optional<double> final_error;
  std::uint64_t total_rows_touched = 0;
  std::uint64_t wall_nanos = 0;
};

struct RunRecord {
  std::string method;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  std::filesystem::path trace_path;
  RunSummary summary;
  bool failed = false;
  std::string error;
};

RunSummary summarize_trace(const std::vector<solvers::TraceRecord>& trace,
                           double residual_tol);

/// Runs every method × repetition with matched seeding: repetition r draws
/// its instance from derive_seed(gen.seed, 2r) and hands every method the
/// same solver seed derive_seed(gen.seed, 2r+1), so within a repetition the
/// methods differ only algorithmically. Writes one trace CSV per run plus
/// summary.csv and per-method curve_<name>.csv into output_dir. With
/// resume, runs whose trace file already exists are summarized from disk
/// instead of re-run. A failed run is recorded and the bench continues.
std::vector<RunRecord> run_bench(const ExperimentSpec& spec,
                                 bool resume = false);

/// Median residual across repetitions at each traced iteration. Runs that
/// stopped early contribute their final residual to later iterations
/// (the solver has terminated; its residual no longer changes).
struct Curve {
  std::vector<std::size_t> iterations;
  std::vector<double> median_residual;
};
Curve median_curve(const std::vector<std::vector<solvers::TraceRecord>>& traces);

void write_summary_csv(const std::vector<RunRecord>& runs,
                       const std::filesystem::path& path);
void write_curve_csv(const Curve& curve, const std::filesystem::path& path);

/// JSON experiment file mirroring ExperimentSpec field names.
ExperimentSpec read_experiment_json(const std::filesystem::path& path);

/// First traced iteration whose residual ≤ (1 + slack) times the residual
/// floor. The floor is the median residual over the last quarter of the
/// traced iteration range, a plateau estimate robust to the oscillation of
/// instantaneous residual snapshots.
std::size_t iters_to_floor(const std::vector<solvers::TraceRecord>& trace,
                           double slack);

/// Most recent traced residual at or before the given iteration (step
/// semantics); the final residual is carried forward past the end of the
/// trace. Throws DimensionError on an empty trace or an iteration before
/// the first record.
double residual_at_iteration(const std::vector<solvers::TraceRecord>& trace,
                             std::size_t iteration);

double median(std::vector<double> values);

/// Randomized bound audits (Theorems 2, 3, 4/5). Per trial a fresh random
/// matrix is drawn with k uniform in [k_min, k_max] and p uniform in
/// [p_min, p_max]; one CSV row per trial is written when out_csv is
/// non-empty.
struct AuditConfig {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t p_min = 10;
  std::size_t p_max = 100;
};

struct AuditOutcome {
  std::size_t trials = 0;
  std::size_t applicable = 0;
  std::size_t violations = 0;
  /// Report-only violation count (Theorem 5's 1 − ε form; never gates).
  std::size_t paper_flag_violations = 0;
};

AuditOutcome audit_thm2(const AuditConfig& cfg,
                        const std::filesystem::path& out_csv);
AuditOutcome audit_thm3(const AuditConfig& cfg,
                        const std::filesystem::path& out_csv);
AuditOutcome audit_thm45(const AuditConfig& cfg,
                         const std::filesystem::path& out_csv);

/// Lemma 1 Monte Carlo: `runs` seeded solve_rka_block runs on a fixed
/// paving, tracking mean and standard error of ‖x_j − x*‖² for j ≤ horizon.
/// recursion_violations counts iterations where the mean exceeds
/// coefficient·mean_{j−1} + per_step_noise by more than 3 standard errors.
struct Lemma1Experiment {
  paving::Lemma1Bound bound;
  std::vector<double> mean_err_sq;
  std::vector<double> se_err_sq;
  std::size_t runs = 0;
  std::size_t recursion_violations = 0;
};

Lemma1Experiment lemma1_experiment(const LinearSystem& sys,
                                   const paving::RowPaving& paving,
                                   std::size_t runs, std::size_t horizon,
                                   std::uint64_t seed);

/// Per-block condition numbers and spectral norms pooled over `n_seeds`
/// clustered pavings vs. random pavings (block_size = clustering k) of the
/// same matrix; the box-plot data comparing paving quality.
struct PavingQuality {
  std::vector<double> clustered_cond;
  std::vector<double> clustered_spectral;
  std::vector<double> random_cond;
  std::vector<double> random_spectral;
  double median_clustered_cond = 0.0;
  double median_clustered_spectral = 0.0;
  double median_random_cond = 0.0;
  double median_random_spectral = 0.0;
};

PavingQuality paving_quality_experiment(const DenseMatrix& a,
                                        const clustering::RowClustering& c,
                                        std::size_t n_seeds,
                                        std::uint64_t seed);

void write_paving_quality_csv(const PavingQuality& q,
                              const std::filesystem::path& path);

}  // namespace kaczmarz::bench
