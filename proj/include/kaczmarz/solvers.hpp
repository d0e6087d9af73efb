#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kaczmarz/dense_matrix.hpp"
#include "kaczmarz/jl_sketch.hpp"
#include "kaczmarz/linear_system.hpp"
#include "kaczmarz/paving.hpp"
#include "kaczmarz/rng.hpp"
#include "kaczmarz/sampling.hpp"

namespace kaczmarz::solvers {

enum class Method {
  Classical,
  Rka,
  RkaJl,
  RkaClusterJl,
  RkaBlock,
  RkaClusterBlock,
};

std::string method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
std::vector<Method> all_methods();

/// How the Test Step guard row is drawn: a fresh norm-weighted draw each
/// iteration (default), or literally the first usable row every time.
enum class GuardRule { FreshSample, FixedFirstRow };

struct SolverConfig {
  Method method = Method::Rka;
  std::size_t max_iters = 10000;
  double residual_tol = 1e-6;
  /// Rows compared per JL selection; 0 means the default min(p, n).
  std::size_t sample_count = 0;
  /// Sketch dimension; 0 means max(10, ceil(4·ln p)).
  std::size_t jl_dim = 0;
  std::size_t cluster_count = 4;
  std::size_t block_size = 4;
  std::uint64_t seed = 0;
  /// Residual is evaluated (and the stopping rule checked) every
  /// trace_every iterations; the final iteration is always traced.
  std::size_t trace_every = 1;
  GuardRule guard = GuardRule::FreshSample;
  /// Starting iterate; zero vector when absent.
  std::optional<Vector> x0;
};

/// One traced iteration. rows_touched is cumulative scalar reads divided by
/// p-row units: a full row costs p, a sketched comparison costs d; fixed
/// per-iteration totals are p (classical/RKA), s·d + 2p (RKA-JL),
/// k·p + s·d + 2p (RKA-Cluster-JL), |τ|·p (block methods). wall_nanos holds
/// the measured value in memory; the CSV writer emits 0 in its place so
/// repeated runs produce byte-identical files.
struct TraceRecord {
  std::size_t iteration = 0;
  double residual = 0.0;
  std::optional<double> error_to_truth;
  std::uint64_t rows_touched = 0;
  std::int64_t selected = -1;
  std::uint64_t wall_nanos = 0;
};

struct SolverState {
  Vector x;
  std::size_t iteration = 0;
  std::vector<TraceRecord> trace;
};

/// Called after every iteration with the new iterate (before tracing), for
/// property tests that need the full step sequence.
using StepObserver =
    std::function<void(std::size_t iteration, std::span<const double> x,
                       std::int64_t selected)>;

/// Projection of x onto the hyperplane ⟨a_i, ·⟩ = b_i.
Vector kaczmarz_step(std::span<const double> x, std::span<const double> a_i,
                     double b_i);

/// x + (A_τ)†(b_τ − A_τ x).
Vector block_step(std::span<const double> x, const DenseMatrix& a_tau,
                  std::span<const double> b_tau);

/// Outcome of one RKA-JL selection (Algorithm 1 steps 3–4 including the
/// Test Step), exposed so the guard guarantee is directly assertable.
struct JlSelection {
  std::size_t sketch_argmax = 0;
  std::size_t guard_row = 0;
  std::size_t selected = 0;
  double exact_gamma_argmax = 0.0;
  double exact_gamma_guard = 0.0;
};

/// Sample `s` candidate rows (norm-weighted, with replacement, deduplicated
/// before evaluation), pick the sketched-γ argmax, then apply the Test
/// Step with a guard row drawn from guard_sampler (always over global row
/// indices). `candidates` maps candidate_sampler outcomes to row indices;
/// empty means that sampler already draws global row indices. Sampled rows
/// whose sketched norm is zero are skipped; if every sampled row is
/// degenerate the sample is redrawn once and then DegenerateSystemError is
/// thrown.
JlSelection select_jl_row(const LinearSystem& sys, const jl::JLSketch& sketch,
                          std::span<const double> x,
                          std::span<const double> x_hat,
                          const WeightedSampler& candidate_sampler,
                          std::span<const std::size_t> candidates,
                          const WeightedSampler& guard_sampler, std::size_t s,
                          GuardRule guard, std::size_t fixed_guard_row,
                          Rng& rng);

SolverState solve_classical(const LinearSystem& sys, const SolverConfig& cfg,
                            const StepObserver& observer = {});
SolverState solve_rka(const LinearSystem& sys, const SolverConfig& cfg,
                      const StepObserver& observer = {});
SolverState solve_rka_jl(const LinearSystem& sys, const SolverConfig& cfg,
                         const StepObserver& observer = {});
SolverState solve_rka_cluster_jl(const LinearSystem& sys,
                                 const SolverConfig& cfg,
                                 const StepObserver& observer = {});
SolverState solve_rka_block(const LinearSystem& sys, const SolverConfig& cfg,
                            const StepObserver& observer = {});
/// Same as solve_rka_block but on a caller-supplied paving, so bound
/// experiments can hold the partition fixed across seeds.
SolverState solve_rka_block_with_paving(const LinearSystem& sys,
                                        const SolverConfig& cfg,
                                        const paving::RowPaving& paving,
                                        const StepObserver& observer = {});
SolverState solve_rka_cluster_block(const LinearSystem& sys,
                                    const SolverConfig& cfg,
                                    const StepObserver& observer = {});

/// Dispatch on cfg.method.
SolverState solve(const LinearSystem& sys, const SolverConfig& cfg,
                  const StepObserver& observer = {});

/// The exact artifacts the block solvers construct internally, rebuildable
/// from (system, config) so per-block spectra referenced by a trace's
/// `selected` column stay recomputable.
clustering::RowClustering clustering_for(const LinearSystem& sys,
                                         const SolverConfig& cfg);
paving::RowPaving random_paving_for(const LinearSystem& sys,
                                    const SolverConfig& cfg);
paving::RowPaving cluster_paving_for(const LinearSystem& sys,
                                     const SolverConfig& cfg);

/// Trace CSV with header
/// `iteration,residual,error_to_truth,rows_touched,selected,wall_nanos`;
/// error_to_truth is empty when unknown and wall_nanos is written as 0 (see
/// TraceRecord).
void write_trace_csv(const std::vector<TraceRecord>& trace,
                     const std::filesystem::path& path);
std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);

}  // namespace kaczmarz::solvers
