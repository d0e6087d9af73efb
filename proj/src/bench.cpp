#include "kaczmarz/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/matrix_io.hpp"

namespace kaczmarz::bench {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

void ExperimentSpec::validate() const {
  gen.validate();
  if (repetitions == 0)
    throw DimensionError("ExperimentSpec: repetitions must be positive");
  if (methods.empty())
    throw DimensionError("ExperimentSpec: methods must be non-empty");
  std::set<std::string> names;
  for (const MethodSpec& m : methods)
    if (!names.insert(m.name).second)
      throw DimensionError("ExperimentSpec: duplicate method name " + m.name);
}

RunSummary summarize_trace(const std::vector<solvers::TraceRecord>& trace,
                           double residual_tol) {
  if (trace.empty()) throw DimensionError("summarize_trace: empty trace");
  const solvers::TraceRecord& last = trace.back();
  RunSummary s;
  s.iterations = last.iteration;
  s.final_residual = last.residual;
  s.final_error = last.error_to_truth;
  s.total_rows_touched = last.rows_touched;
  s.wall_nanos = last.wall_nanos;
  s.iters_to_tol = last.iteration;
  for (const solvers::TraceRecord& rec : trace) {
    if (rec.residual <= residual_tol) {
      s.iters_to_tol = rec.iteration;
      break;
    }
  }
  return s;
}

std::vector<RunRecord> run_bench(const ExperimentSpec& spec, bool resume) {
  spec.validate();
  std::filesystem::create_directories(spec.output_dir);

  std::vector<RunRecord> records;
  std::map<std::string, std::vector<std::vector<solvers::TraceRecord>>> traces;
  for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
    datagen::GenSpec gen = spec.gen;
    gen.seed = derive_seed(spec.gen.seed, 2 * rep);
    const std::uint64_t solver_seed = derive_seed(spec.gen.seed, 2 * rep + 1);
    const datagen::GeneratedSystem instance = datagen::gen_instance(gen);

    for (const MethodSpec& method : spec.methods) {
      RunRecord rec;
      rec.method = method.name;
      rec.repetition = rep;
      rec.seed = solver_seed;
      rec.trace_path =
          spec.output_dir /
          ("trace_" + method.name + "_rep" + std::to_string(rep) + ".csv");
      solvers::SolverConfig cfg = method.config;
      cfg.seed = solver_seed;
      try {
        std::vector<solvers::TraceRecord> trace;
        if (resume && std::filesystem::exists(rec.trace_path)) {
          trace = solvers::read_trace_csv(rec.trace_path);
        } else {
          const solvers::SolverState st = solvers::solve(instance.system, cfg);
          solvers::write_trace_csv(st.trace, rec.trace_path);
          trace = st.trace;
        }
        rec.summary = summarize_trace(trace, cfg.residual_tol);
        traces[method.name].push_back(std::move(trace));
      } catch (const Error& err) {
        rec.failed = true;
        rec.error = err.what();
        std::cerr << "run failed (" << method.name << ", rep " << rep
                  << "): " << err.what() << '\n';
      }
      records.push_back(std::move(rec));
    }
  }

  std::vector<std::string> order;
  for (const MethodSpec& m : spec.methods) order.push_back(m.name);
  std::stable_sort(records.begin(), records.end(),
                   [&](const RunRecord& a, const RunRecord& b) {
                     const auto ia =
                         std::find(order.begin(), order.end(), a.method);
                     const auto ib =
                         std::find(order.begin(), order.end(), b.method);
                     if (ia != ib) return ia < ib;
                     return a.repetition < b.repetition;
                   });
  write_summary_csv(records, spec.output_dir / "summary.csv");
  for (const MethodSpec& m : spec.methods) {
    const auto it = traces.find(m.name);
    if (it == traces.end() || it->second.empty()) continue;
    write_curve_csv(median_curve(it->second),
                    spec.output_dir / ("curve_" + m.name + ".csv"));
  }
  return records;
}

double residual_at_iteration(const std::vector<solvers::TraceRecord>& trace,
                             std::size_t iteration) {
  if (trace.empty())
    throw DimensionError("residual_at_iteration: empty trace");
  if (iteration < trace.front().iteration)
    throw DimensionError("residual_at_iteration: before first record");
  double value = trace.front().residual;
  for (const solvers::TraceRecord& rec : trace) {
    if (rec.iteration > iteration) break;
    value = rec.residual;
  }
  return value;
}

Curve median_curve(const std::vector<std::vector<solvers::TraceRecord>>& traces) {
  if (traces.empty()) throw DimensionError("median_curve: no traces");
  std::set<std::size_t> iteration_set;
  for (const auto& trace : traces)
    for (const solvers::TraceRecord& rec : trace)
      iteration_set.insert(rec.iteration);
  Curve curve;
  for (std::size_t iter : iteration_set) {
    std::vector<double> residuals;
    residuals.reserve(traces.size());
    for (const auto& trace : traces)
      residuals.push_back(residual_at_iteration(trace, iter));
    curve.iterations.push_back(iter);
    curve.median_residual.push_back(median(std::move(residuals)));
  }
  return curve;
}

void write_summary_csv(const std::vector<RunRecord>& runs,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "method,repetition,seed,iters_to_tol,iterations,final_residual,"
         "final_error,rows_touched,wall_nanos,status,trace_file\n";
  for (const RunRecord& r : runs) {
    out << r.method << ',' << r.repetition << ',' << r.seed << ','
        << r.summary.iters_to_tol << ',' << r.summary.iterations << ','
        << format_double(r.summary.final_residual) << ','
        << optional_field(r.summary.final_error) << ','
        << r.summary.total_rows_touched << ",0,"
        << (r.failed ? "failed" : "ok") << ','
        << r.trace_path.filename().string() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_curve_csv(const Curve& curve, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "iteration,median_residual\n";
  for (std::size_t i = 0; i < curve.iterations.size(); ++i)
    out << curve.iterations[i] << ','
        << format_double(curve.median_residual[i]) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

ExperimentSpec read_experiment_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  nlohmann::json j;
  try {
    in >> j;
    ExperimentSpec spec;
    const auto& g = j.at("gen");
    spec.gen.n = g.at("n").get<std::size_t>();
    spec.gen.p = g.at("p").get<std::size_t>();
    spec.gen.k = g.at("k").get<std::size_t>();
    spec.gen.spread = g.value("spread", spec.gen.spread);
    spec.gen.noise_sigma = g.value("noise_sigma", spec.gen.noise_sigma);
    spec.gen.seed = g.value("seed", spec.gen.seed);
    for (const auto& m : j.at("methods")) {
      MethodSpec ms;
      const std::string method_str = m.at("method").get<std::string>();
      const auto method = solvers::parse_method(method_str);
      if (!method) throw IoError("unknown method " + method_str);
      ms.config.method = *method;
      ms.config.max_iters = m.value("max_iters", ms.config.max_iters);
      ms.config.residual_tol = m.value("residual_tol", ms.config.residual_tol);
      ms.config.sample_count = m.value("sample_count", ms.config.sample_count);
      ms.config.jl_dim = m.value("jl_dim", ms.config.jl_dim);
      ms.config.cluster_count =
          m.value("cluster_count", ms.config.cluster_count);
      ms.config.block_size = m.value("block_size", ms.config.block_size);
      ms.config.trace_every = m.value("trace_every", ms.config.trace_every);
      const std::string guard = m.value("guard", std::string("fresh-sample"));
      if (guard == "fresh-sample")
        ms.config.guard = solvers::GuardRule::FreshSample;
      else if (guard == "fixed-first-row")
        ms.config.guard = solvers::GuardRule::FixedFirstRow;
      else
        throw IoError("unknown guard rule " + guard);
      ms.name = m.value("name", method_str);
      spec.methods.push_back(std::move(ms));
    }
    spec.repetitions = j.value("repetitions", spec.repetitions);
    spec.output_dir = j.value("output_dir", std::string("bench-out"));
    return spec;
  } catch (const nlohmann::json::exception& err) {
    throw IoError("bad experiment file " + path.string() + ": " + err.what());
  }
}

std::size_t iters_to_floor(const std::vector<solvers::TraceRecord>& trace,
                           double slack) {
  if (trace.empty()) throw DimensionError("iters_to_floor: empty trace");
  const std::size_t last = trace.back().iteration;
  const std::size_t tail_start = last - last / 4;
  std::vector<double> tail;
  for (const solvers::TraceRecord& rec : trace)
    if (rec.iteration >= tail_start) tail.push_back(rec.residual);
  const double floor = median(std::move(tail));
  const double target = floor * (1.0 + slack);
  for (const solvers::TraceRecord& rec : trace)
    if (rec.residual <= target) return rec.iteration;
  return trace.back().iteration;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DimensionError("median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

struct TrialShape {
  std::size_t k = 0;
  std::size_t p = 0;
};

TrialShape draw_shape(const AuditConfig& cfg, Rng& rng) {
  if (cfg.k_min < 2 || cfg.k_min > cfg.k_max || cfg.p_min == 0 ||
      cfg.p_min > cfg.p_max)
    throw DimensionError("audit: bad shape ranges");
  TrialShape s;
  s.k = cfg.k_min + rng.uniform_index(cfg.k_max - cfg.k_min + 1);
  s.p = cfg.p_min + rng.uniform_index(cfg.p_max - cfg.p_min + 1);
  return s;
}

}  // namespace

AuditOutcome audit_thm2(const AuditConfig& cfg,
                        const std::filesystem::path& out_csv) {
  std::ofstream out;
  if (!out_csv.empty()) {
    out = open_out(out_csv);
    out << "trial,k,p,ov,spectral,bound,holds\n";
  }
  AuditOutcome outcome;
  outcome.trials = cfg.trials;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    Rng rng(derive_seed(cfg.seed, t));
    const TrialShape shape = draw_shape(cfg, rng);
    const DenseMatrix a = paving::random_unit_rows(shape.k, shape.p, rng);
    const paving::Thm2Result r = paving::check_thm2(a);
    ++outcome.applicable;
    if (!r.holds) ++outcome.violations;
    if (out)
      out << t << ',' << shape.k << ',' << shape.p << ','
          << format_double(r.ov) << ',' << format_double(r.spectral) << ','
          << format_double(r.bound) << ',' << (r.holds ? 1 : 0) << '\n';
  }
  return outcome;
}

AuditOutcome audit_thm3(const AuditConfig& cfg,
                        const std::filesystem::path& out_csv) {
  std::ofstream out;
  if (!out_csv.empty()) {
    out = open_out(out_csv);
    out << "trial,k,p,delta,spectral,bound,applicable,holds\n";
  }
  AuditOutcome outcome;
  outcome.trials = cfg.trials;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    Rng rng(derive_seed(cfg.seed, t));
    const TrialShape shape = draw_shape(cfg, rng);
    const DenseMatrix a = paving::random_cone_rows(shape.k, shape.p, 0.15, rng);
    const paving::Thm3Result r = paving::check_thm3(a);
    if (r.applicable) {
      ++outcome.applicable;
      if (!r.holds) ++outcome.violations;
    }
    if (out)
      out << t << ',' << shape.k << ',' << shape.p << ','
          << format_double(r.delta) << ',' << format_double(r.spectral) << ','
          << format_double(r.bound) << ',' << (r.applicable ? 1 : 0) << ','
          << (r.holds ? 1 : 0) << '\n';
  }
  return outcome;
}

AuditOutcome audit_thm45(const AuditConfig& cfg,
                         const std::filesystem::path& out_csv) {
  std::ofstream out;
  if (!out_csv.empty()) {
    out = open_out(out_csv);
    out << "trial,k,p,ov,sigma_min,bound_paper,bound_gershgorin,"
           "gershgorin_applicable,cond,cond_bound,holds_paper,"
           "holds_gershgorin,holds_cond\n";
  }
  AuditOutcome outcome;
  outcome.trials = cfg.trials;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    Rng rng(derive_seed(cfg.seed, t));
    const TrialShape shape = draw_shape(cfg, rng);
    const DenseMatrix a = paving::random_unit_rows(shape.k, shape.p, rng);
    const paving::Thm45Result r = paving::check_thm4_thm5(a);
    if (r.gershgorin_applicable) {
      ++outcome.applicable;
      if (!r.holds_gershgorin) ++outcome.violations;
    }
    if (!r.holds_paper) ++outcome.paper_flag_violations;
    if (out)
      out << t << ',' << shape.k << ',' << shape.p << ','
          << format_double(r.ov) << ',' << format_double(r.sigma_min) << ','
          << format_double(r.sigma_min_bound_paper) << ','
          << format_double(r.sigma_min_bound_gershgorin) << ','
          << (r.gershgorin_applicable ? 1 : 0) << ',' << format_double(r.cond)
          << ',' << format_double(r.cond_bound) << ','
          << (r.holds_paper ? 1 : 0) << ',' << (r.holds_gershgorin ? 1 : 0)
          << ',' << (r.holds_cond ? 1 : 0) << '\n';
  }
  return outcome;
}

Lemma1Experiment lemma1_experiment(const LinearSystem& sys,
                                   const paving::RowPaving& paving,
                                   std::size_t runs, std::size_t horizon,
                                   std::uint64_t seed) {
  if (runs < 2) throw DimensionError("lemma1_experiment: need at least 2 runs");
  if (horizon == 0)
    throw DimensionError("lemma1_experiment: horizon must be positive");
  if (!sys.x_star || !sys.e)
    throw DimensionError("lemma1_experiment: system must carry x_star and e");
  const Vector x0(sys.n_cols(), 0.0);
  Lemma1Experiment out;
  out.bound = paving::lemma1_bound(sys.A, paving, x0, *sys.x_star, *sys.e);
  out.runs = runs;

  std::vector<double> sum(horizon + 1, 0.0);
  std::vector<double> sum_sq(horizon + 1, 0.0);
  const Vector& x_star = *sys.x_star;
  for (std::size_t r = 0; r < runs; ++r) {
    solvers::SolverConfig cfg;
    cfg.method = solvers::Method::RkaBlock;
    cfg.max_iters = horizon;
    cfg.residual_tol = 1e-300;
    cfg.trace_every = horizon;
    cfg.seed = derive_seed(seed, r);
    const double err0 = [&] {
      double acc = 0.0;
      for (std::size_t j = 0; j < x_star.size(); ++j)
        acc += (x0[j] - x_star[j]) * (x0[j] - x_star[j]);
      return acc;
    }();
    sum[0] += err0;
    sum_sq[0] += err0 * err0;
    auto observer = [&](std::size_t iter, std::span<const double> x,
                        std::int64_t) {
      if (iter > horizon) return;
      double acc = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j)
        acc += (x[j] - x_star[j]) * (x[j] - x_star[j]);
      sum[iter] += acc;
      sum_sq[iter] += acc * acc;
    };
    solvers::solve_rka_block_with_paving(sys, cfg, paving, observer);
  }

  const double nr = static_cast<double>(runs);
  out.mean_err_sq.resize(horizon + 1);
  out.se_err_sq.resize(horizon + 1);
  for (std::size_t j = 0; j <= horizon; ++j) {
    out.mean_err_sq[j] = sum[j] / nr;
    const double var =
        std::max(0.0, sum_sq[j] / nr - out.mean_err_sq[j] * out.mean_err_sq[j]);
    out.se_err_sq[j] = std::sqrt(var / (nr - 1.0));
  }
  for (std::size_t j = 1; j <= horizon; ++j) {
    const double rhs = out.bound.coefficient * out.mean_err_sq[j - 1] +
                       out.bound.per_step_noise + 3.0 * out.se_err_sq[j];
    if (out.mean_err_sq[j] > rhs) ++out.recursion_violations;
  }
  return out;
}

PavingQuality paving_quality_experiment(const DenseMatrix& a,
                                        const clustering::RowClustering& c,
                                        std::size_t n_seeds,
                                        std::uint64_t seed) {
  if (n_seeds == 0)
    throw DimensionError("paving_quality_experiment: need at least one seed");
  PavingQuality q;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    const paving::RowPaving cp =
        paving::build_cluster_paving(a, c, derive_seed(seed, 2 * s));
    const paving::RowPaving rp =
        paving::build_random_paving(a, c.k, derive_seed(seed, 2 * s + 1));
    for (const paving::BlockSpectrum& b : cp.per_block) {
      q.clustered_cond.push_back(b.cond);
      q.clustered_spectral.push_back(b.spectral_norm);
    }
    for (const paving::BlockSpectrum& b : rp.per_block) {
      q.random_cond.push_back(b.cond);
      q.random_spectral.push_back(b.spectral_norm);
    }
  }
  q.median_clustered_cond = median(q.clustered_cond);
  q.median_clustered_spectral = median(q.clustered_spectral);
  q.median_random_cond = median(q.random_cond);
  q.median_random_spectral = median(q.random_spectral);
  return q;
}

void write_paving_quality_csv(const PavingQuality& q,
                              const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "paving,cond,spectral_norm\n";
  for (std::size_t i = 0; i < q.clustered_cond.size(); ++i)
    out << "clustered," << format_double(q.clustered_cond[i]) << ','
        << format_double(q.clustered_spectral[i]) << '\n';
  for (std::size_t i = 0; i < q.random_cond.size(); ++i)
    out << "random," << format_double(q.random_cond[i]) << ','
        << format_double(q.random_spectral[i]) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace kaczmarz::bench
