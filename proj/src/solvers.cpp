#include "kaczmarz/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/matrix_io.hpp"

namespace kaczmarz::solvers {

namespace {

/// Substream ids per concern, so methods sharing a base seed draw their
/// sketch, sampling, clustering, and paving randomness independently.
enum Stream : std::uint64_t {
  kStreamSketch = 0,
  kStreamSampling = 1,
  kStreamClustering = 2,
  kStreamPaving = 3,
};

struct StepResult {
  std::int64_t selected = -1;
  std::uint64_t rows_read = 0;
};

Vector starting_point(const LinearSystem& sys, const SolverConfig& cfg) {
  if (!cfg.x0) return Vector(sys.n_cols(), 0.0);
  if (cfg.x0->size() != sys.n_cols())
    throw DimensionError("solve: x0 length != n_cols");
  return *cfg.x0;
}

std::optional<double> error_to_truth(const LinearSystem& sys,
                                     std::span<const double> x) {
  if (!sys.x_star) return std::nullopt;
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - (*sys.x_star)[j];
    acc += d * d;
  }
  return std::sqrt(acc);
}

void check_common(const SolverConfig& cfg) {
  if (cfg.max_iters == 0)
    throw DimensionError("solve: max_iters must be positive");
  if (cfg.trace_every == 0)
    throw DimensionError("solve: trace_every must be positive");
  if (!(cfg.residual_tol > 0.0))
    throw DimensionError("solve: residual_tol must be positive");
}

template <typename StepFn>
SolverState drive(const LinearSystem& sys, const SolverConfig& cfg,
                  const StepObserver& observer, StepFn&& step) {
  sys.validate();
  check_common(cfg);
  SolverState st;
  st.x = starting_point(sys, cfg);
  std::uint64_t rows_touched = 0;
  const auto t0 = std::chrono::steady_clock::now();
  auto record = [&](std::size_t iter, std::int64_t selected) {
    TraceRecord rec;
    rec.iteration = iter;
    rec.residual = relative_residual(sys, st.x);
    rec.error_to_truth = error_to_truth(sys, st.x);
    rec.rows_touched = rows_touched;
    rec.selected = selected;
    rec.wall_nanos = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now() - t0)
            .count());
    st.trace.push_back(rec);
    return rec.residual <= cfg.residual_tol;
  };
  if (record(0, -1)) return st;
  for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
    const StepResult r = step(st.x);
    rows_touched += r.rows_read;
    st.iteration = iter;
    if (observer) observer(iter, st.x, r.selected);
    if (iter % cfg.trace_every == 0 || iter == cfg.max_iters)
      if (record(iter, r.selected)) break;
  }
  return st;
}

void kaczmarz_step_inplace(Vector& x, std::span<const double> a_i, double b_i) {
  const double nrm_sq = norm2_sq(a_i);
  if (nrm_sq == 0.0)
    throw DegenerateRowError("kaczmarz_step: zero row");
  const double scale = (b_i - dot(a_i, x)) / nrm_sq;
  for (std::size_t j = 0; j < x.size(); ++j) x[j] += scale * a_i[j];
}

void block_step_inplace(Vector& x, const DenseMatrix& a_tau,
                        std::span<const double> b_tau) {
  Vector r(a_tau.n_rows());
  for (std::size_t i = 0; i < a_tau.n_rows(); ++i)
    r[i] = b_tau[i] - dot(a_tau.row(i), x);
  const Vector z = least_norm_solve(a_tau, r);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] += z[j];
}

Vector squared_row_norms(const DenseMatrix& a) {
  Vector w(a.n_rows());
  for (std::size_t i = 0; i < a.n_rows(); ++i) w[i] = norm2_sq(a.row(i));
  return w;
}

std::size_t resolve_sample_count(const SolverConfig& cfg, std::size_t n,
                                 std::size_t p) {
  const std::size_t s = cfg.sample_count ? cfg.sample_count : std::min(p, n);
  if (s > n)
    throw DimensionError("solve: sample_count exceeds the number of rows");
  return s;
}

std::size_t first_usable_row(const DenseMatrix& a) {
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    if (norm2_sq(a.row(i)) > 0.0) return i;
  throw DegenerateSystemError("solve: all rows are zero");
}

std::pair<DenseMatrix, Vector> extract_block(const LinearSystem& sys,
                                             std::span<const std::size_t> rows) {
  DenseMatrix m(rows.size(), sys.n_cols());
  Vector rhs(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = sys.A.row(rows[i]);
    std::copy(src.begin(), src.end(), m.row(i).begin());
    rhs[i] = sys.b[rows[i]];
  }
  return {std::move(m), std::move(rhs)};
}

SolverState solve_block_common(const LinearSystem& sys, const SolverConfig& cfg,
                               const paving::RowPaving& paving,
                               const StepObserver& observer) {
  if (paving.m == 0)
    throw DegeneratePavingError("solve: paving has no blocks");
  std::vector<DenseMatrix> mats;
  std::vector<Vector> rhs;
  mats.reserve(paving.m);
  rhs.reserve(paving.m);
  for (const auto& block : paving.blocks) {
    auto [m, r] = extract_block(sys, block);
    mats.push_back(std::move(m));
    rhs.push_back(std::move(r));
  }
  Rng rng(derive_seed(cfg.seed, kStreamSampling));
  const std::uint64_t p = sys.n_cols();
  auto step = [&](Vector& x) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const std::size_t bid = rng.uniform_index(paving.m);
      try {
        block_step_inplace(x, mats[bid], rhs[bid]);
        return StepResult{static_cast<std::int64_t>(bid),
                          mats[bid].n_rows() * p};
      } catch (const ComputationError& err) {
        std::cerr << "resampling failed block " << bid << ": " << err.what()
                  << '\n';
      }
    }
    throw ComputationError("solve: every sampled block failed to solve");
  };
  return drive(sys, cfg, observer, step);
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Classical: return "classical";
    case Method::Rka: return "rka";
    case Method::RkaJl: return "rka-jl";
    case Method::RkaClusterJl: return "rka-cluster-jl";
    case Method::RkaBlock: return "rka-block";
    case Method::RkaClusterBlock: return "rka-cluster-block";
  }
  throw DimensionError("method_name: unknown method");
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : all_methods())
    if (method_name(m) == name) return m;
  return std::nullopt;
}

std::vector<Method> all_methods() {
  return {Method::Classical,  Method::Rka,      Method::RkaJl,
          Method::RkaClusterJl, Method::RkaBlock, Method::RkaClusterBlock};
}

Vector kaczmarz_step(std::span<const double> x, std::span<const double> a_i,
                     double b_i) {
  if (x.size() != a_i.size())
    throw DimensionError("kaczmarz_step: length mismatch");
  Vector out(x.begin(), x.end());
  kaczmarz_step_inplace(out, a_i, b_i);
  return out;
}

Vector block_step(std::span<const double> x, const DenseMatrix& a_tau,
                  std::span<const double> b_tau) {
  if (x.size() != a_tau.n_cols())
    throw DimensionError("block_step: x length != block columns");
  if (b_tau.size() != a_tau.n_rows())
    throw DimensionError("block_step: rhs length != block rows");
  Vector out(x.begin(), x.end());
  block_step_inplace(out, a_tau, b_tau);
  return out;
}

JlSelection select_jl_row(const LinearSystem& sys, const jl::JLSketch& sketch,
                          std::span<const double> x,
                          std::span<const double> x_hat,
                          const WeightedSampler& candidate_sampler,
                          std::span<const std::size_t> candidates,
                          const WeightedSampler& guard_sampler, std::size_t s,
                          GuardRule guard, std::size_t fixed_guard_row,
                          Rng& rng) {
  if (s == 0)
    throw DimensionError("select_jl_row: sample count must be positive");
  std::vector<std::size_t> rows;
  auto draw_batch = [&] {
    rows.clear();
    for (std::size_t t = 0; t < s; ++t) {
      const std::size_t idx = candidate_sampler.sample(rng);
      rows.push_back(candidates.empty() ? idx : candidates[idx]);
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::erase_if(rows, [&](std::size_t r) {
      return sketch.sketched_row_norms[r] == 0.0;
    });
  };
  draw_batch();
  if (rows.empty()) draw_batch();
  if (rows.empty())
    throw DegenerateSystemError("select_jl_row: all sampled rows degenerate");

  JlSelection sel;
  double best = -1.0;
  for (std::size_t r : rows) {
    const double g = jl::sketched_gamma(sketch, r, x_hat, sys.b[r]);
    if (g > best) {
      best = g;
      sel.sketch_argmax = r;
    }
  }
  auto exact_gamma = [&](std::size_t r) {
    const double nrm = norm2(sys.A.row(r));
    if (nrm == 0.0)
      throw DegenerateRowError("select_jl_row: zero row " + std::to_string(r));
    return std::abs(sys.b[r] - dot(sys.A.row(r), x)) / nrm;
  };
  sel.guard_row = guard == GuardRule::FreshSample ? guard_sampler.sample(rng)
                                                  : fixed_guard_row;
  sel.exact_gamma_argmax = exact_gamma(sel.sketch_argmax);
  sel.exact_gamma_guard = exact_gamma(sel.guard_row);
  sel.selected = sel.exact_gamma_guard > sel.exact_gamma_argmax
                     ? sel.guard_row
                     : sel.sketch_argmax;
  return sel;
}

SolverState solve_classical(const LinearSystem& sys, const SolverConfig& cfg,
                            const StepObserver& observer) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < sys.n_rows(); ++i)
    if (norm2_sq(sys.A.row(i)) > 0.0) usable.push_back(i);
  if (usable.empty())
    throw DegenerateSystemError("solve_classical: all rows are zero");
  const std::uint64_t p = sys.n_cols();
  std::size_t cursor = 0;
  return drive(sys, cfg, observer, [&](Vector& x) {
    const std::size_t i = usable[cursor];
    cursor = (cursor + 1) % usable.size();
    kaczmarz_step_inplace(x, sys.A.row(i), sys.b[i]);
    return StepResult{static_cast<std::int64_t>(i), p};
  });
}

SolverState solve_rka(const LinearSystem& sys, const SolverConfig& cfg,
                      const StepObserver& observer) {
  const Vector w = squared_row_norms(sys.A);
  const WeightedSampler sampler(w);
  if (sampler.total() <= 0.0)
    throw DegenerateSystemError("solve_rka: all rows are zero");
  Rng rng(derive_seed(cfg.seed, kStreamSampling));
  const std::uint64_t p = sys.n_cols();
  return drive(sys, cfg, observer, [&](Vector& x) {
    const std::size_t i = sampler.sample(rng);
    kaczmarz_step_inplace(x, sys.A.row(i), sys.b[i]);
    return StepResult{static_cast<std::int64_t>(i), p};
  });
}

SolverState solve_rka_jl(const LinearSystem& sys, const SolverConfig& cfg,
                         const StepObserver& observer) {
  const std::size_t n = sys.n_rows();
  const std::size_t p = sys.n_cols();
  const std::size_t s = resolve_sample_count(cfg, n, p);
  const std::size_t d = cfg.jl_dim ? cfg.jl_dim : jl::default_sketch_dim(p);
  const jl::JLSketch sketch =
      jl::build_sketch(sys.A, d, derive_seed(cfg.seed, kStreamSketch));
  const Vector w = squared_row_norms(sys.A);
  const WeightedSampler sampler(w);
  if (sampler.total() <= 0.0)
    throw DegenerateSystemError("solve_rka_jl: all rows are zero");
  const std::size_t fixed_guard = first_usable_row(sys.A);
  Rng rng(derive_seed(cfg.seed, kStreamSampling));
  const std::uint64_t cost = static_cast<std::uint64_t>(s) * d + 2 * p;
  return drive(sys, cfg, observer, [&](Vector& x) {
    const Vector x_hat = jl::sketch_point(sketch, x);
    const JlSelection sel =
        select_jl_row(sys, sketch, x, x_hat, sampler, {}, sampler, s,
                      cfg.guard, fixed_guard, rng);
    kaczmarz_step_inplace(x, sys.A.row(sel.selected), sys.b[sel.selected]);
    return StepResult{static_cast<std::int64_t>(sel.selected), cost};
  });
}

SolverState solve_rka_cluster_jl(const LinearSystem& sys,
                                 const SolverConfig& cfg,
                                 const StepObserver& observer) {
  const std::size_t n = sys.n_rows();
  const std::size_t p = sys.n_cols();
  const std::size_t s = resolve_sample_count(cfg, n, p);
  const std::size_t d = cfg.jl_dim ? cfg.jl_dim : jl::default_sketch_dim(p);
  const jl::JLSketch sketch =
      jl::build_sketch(sys.A, d, derive_seed(cfg.seed, kStreamSketch));
  const clustering::RowClustering clu = clustering_for(sys, cfg);
  const Vector w = squared_row_norms(sys.A);
  const WeightedSampler global_sampler(w);

  std::vector<std::vector<std::size_t>> members(clu.k);
  for (std::size_t i = 0; i < n; ++i) members[clu.assignments[i]].push_back(i);
  std::vector<WeightedSampler> cluster_samplers;
  cluster_samplers.reserve(clu.k);
  for (std::size_t l = 0; l < clu.k; ++l) {
    Vector cw(members[l].size());
    for (std::size_t t = 0; t < members[l].size(); ++t)
      cw[t] = w[members[l][t]];
    cluster_samplers.emplace_back(cw);
  }

  const std::size_t fixed_guard = first_usable_row(sys.A);
  Rng rng(derive_seed(cfg.seed, kStreamSampling));
  const std::uint64_t cost =
      static_cast<std::uint64_t>(clu.k) * p + static_cast<std::uint64_t>(s) * d +
      2 * p;
  return drive(sys, cfg, observer, [&](Vector& x) {
    const std::size_t t = clustering::furthest_cluster(clu, x);
    const Vector x_hat = jl::sketch_point(sketch, x);
    const JlSelection sel =
        select_jl_row(sys, sketch, x, x_hat, cluster_samplers[t], members[t],
                      global_sampler, s, cfg.guard, fixed_guard, rng);
    kaczmarz_step_inplace(x, sys.A.row(sel.selected), sys.b[sel.selected]);
    return StepResult{static_cast<std::int64_t>(sel.selected), cost};
  });
}

SolverState solve_rka_block(const LinearSystem& sys, const SolverConfig& cfg,
                            const StepObserver& observer) {
  return solve_block_common(sys, cfg, random_paving_for(sys, cfg), observer);
}

SolverState solve_rka_block_with_paving(const LinearSystem& sys,
                                        const SolverConfig& cfg,
                                        const paving::RowPaving& paving,
                                        const StepObserver& observer) {
  return solve_block_common(sys, cfg, paving, observer);
}

SolverState solve_rka_cluster_block(const LinearSystem& sys,
                                    const SolverConfig& cfg,
                                    const StepObserver& observer) {
  return solve_block_common(sys, cfg, cluster_paving_for(sys, cfg), observer);
}

SolverState solve(const LinearSystem& sys, const SolverConfig& cfg,
                  const StepObserver& observer) {
  switch (cfg.method) {
    case Method::Classical: return solve_classical(sys, cfg, observer);
    case Method::Rka: return solve_rka(sys, cfg, observer);
    case Method::RkaJl: return solve_rka_jl(sys, cfg, observer);
    case Method::RkaClusterJl: return solve_rka_cluster_jl(sys, cfg, observer);
    case Method::RkaBlock: return solve_rka_block(sys, cfg, observer);
    case Method::RkaClusterBlock:
      return solve_rka_cluster_block(sys, cfg, observer);
  }
  throw DimensionError("solve: unknown method");
}

clustering::RowClustering clustering_for(const LinearSystem& sys,
                                         const SolverConfig& cfg) {
  return clustering::cluster_rows(sys.A, sys.b, cfg.cluster_count,
                                  derive_seed(cfg.seed, kStreamClustering), 100);
}

paving::RowPaving random_paving_for(const LinearSystem& sys,
                                    const SolverConfig& cfg) {
  if (cfg.block_size > sys.n_cols())
    std::cerr << "warning: block_size " << cfg.block_size
              << " exceeds the column count " << sys.n_cols() << '\n';
  return paving::build_random_paving(sys.A, cfg.block_size,
                                     derive_seed(cfg.seed, kStreamPaving));
}

paving::RowPaving cluster_paving_for(const LinearSystem& sys,
                                     const SolverConfig& cfg) {
  return paving::build_cluster_paving(sys.A, clustering_for(sys, cfg),
                                      derive_seed(cfg.seed, kStreamPaving));
}

void write_trace_csv(const std::vector<TraceRecord>& trace,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "iteration,residual,error_to_truth,rows_touched,selected,wall_nanos\n";
  for (const TraceRecord& rec : trace) {
    out << rec.iteration << ',' << format_double(rec.residual) << ',';
    if (rec.error_to_truth) out << format_double(*rec.error_to_truth);
    out << ',' << rec.rows_touched << ',' << rec.selected << ",0\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  if (!std::getline(in, line) ||
      line != "iteration,residual,error_to_truth,rows_touched,selected,wall_nanos")
    throw IoError("bad trace header in " + path.string());
  std::vector<TraceRecord> trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(
          start, (comma == std::string::npos ? line.size() : comma) - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 6) throw IoError("bad trace row in " + path.string());
    TraceRecord rec;
    rec.iteration = std::stoull(fields[0]);
    rec.residual = std::stod(fields[1]);
    if (!fields[2].empty()) rec.error_to_truth = std::stod(fields[2]);
    rec.rows_touched = std::stoull(fields[3]);
    rec.selected = std::stoll(fields[4]);
    rec.wall_nanos = std::stoull(fields[5]);
    trace.push_back(rec);
  }
  return trace;
}

}  // namespace kaczmarz::solvers
