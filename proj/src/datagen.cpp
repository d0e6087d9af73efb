#include "kaczmarz/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/matrix_io.hpp"
#include "kaczmarz/rng.hpp"
#include "eigen_util.hpp"

namespace kaczmarz::datagen {

namespace {

enum Stream : std::uint64_t {
  kStreamDirections = 0,
  kStreamRows = 1,
  kStreamTruth = 2,
  kStreamNoise = 4,
};

/// k orthonormal columns of a QR-factorized seeded Gaussian p×k matrix,
/// returned as a k×p row matrix.
DenseMatrix orthonormal_directions(std::size_t k, std::size_t p,
                                   std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g(p, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < p; ++i)
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rng.gaussian();
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                static_cast<Eigen::Index>(k));
  return detail::from_eigen(q.transpose());
}

Vector standard_normal(std::size_t len, Rng& rng) {
  Vector v(len);
  for (double& x : v) x = rng.gaussian();
  return v;
}

Vector multiply(const DenseMatrix& a, std::span<const double> x) {
  Vector out(a.n_rows());
  for (std::size_t i = 0; i < a.n_rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

}  // namespace

void GenSpec::validate() const {
  if (n == 0 || p == 0 || k == 0)
    throw DimensionError("GenSpec: n, p, k must be positive");
  if (k > std::min(n, p))
    throw DimensionError("GenSpec: k must not exceed min(n, p)");
  if (!(spread >= 0.0)) throw DimensionError("GenSpec: spread must be >= 0");
  if (!(noise_sigma >= 0.0))
    throw DimensionError("GenSpec: noise_sigma must be >= 0");
}

GeneratedSystem gen_clustered_system(const GenSpec& spec) {
  spec.validate();
  const DenseMatrix dirs = orthonormal_directions(
      spec.k, spec.p, derive_seed(spec.seed, kStreamDirections));

  Rng row_rng(derive_seed(spec.seed, kStreamRows));
  const double ln_lo = std::log(0.5);
  const double ln_hi = std::log(2.0);
  DenseMatrix a(spec.n, spec.p);
  std::vector<std::size_t> labels(spec.n);
  Vector g(spec.p);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t label = i % spec.k;
    labels[i] = label;
    const auto dir = dirs.row(label);
    auto row = a.row(i);
    if (spec.spread > 0.0) {
      for (double& v : g) v = row_rng.gaussian();
      const double g_nrm = norm2(g);
      for (std::size_t j = 0; j < spec.p; ++j)
        row[j] = dir[j] + spec.spread * g[j] / g_nrm;
    } else {
      std::copy(dir.begin(), dir.end(), row.begin());
    }
    const double scale =
        std::exp(ln_lo + (ln_hi - ln_lo) * row_rng.uniform());
    const double nrm = norm2(row);
    for (double& v : row) v *= scale / nrm;
  }

  Rng truth_rng(derive_seed(spec.seed, kStreamTruth));
  GeneratedSystem out;
  out.labels = std::move(labels);
  out.system.A = std::move(a);
  out.system.x_star = standard_normal(spec.p, truth_rng);
  out.system.b = multiply(out.system.A, *out.system.x_star);
  out.system.e = Vector(spec.n, 0.0);
  return out;
}

LinearSystem gen_gaussian_system(std::size_t n, std::size_t p,
                                 std::uint64_t seed) {
  if (n == 0 || p == 0)
    throw DimensionError("gen_gaussian_system: dimensions must be positive");
  if (n < p)
    std::fputs("warning: gen_gaussian_system with n < p is underdetermined\n",
               stderr);
  Rng rng(derive_seed(seed, kStreamRows));
  DenseMatrix a(n, p);
  for (double& v : a.entries()) v = rng.gaussian();
  Rng truth_rng(derive_seed(seed, kStreamTruth));
  LinearSystem sys;
  sys.A = std::move(a);
  sys.x_star = standard_normal(p, truth_rng);
  sys.b = multiply(sys.A, *sys.x_star);
  sys.e = Vector(n, 0.0);
  return sys;
}

LinearSystem add_noise(const LinearSystem& sys, double sigma,
                       std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DimensionError("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return sys;
  LinearSystem out = sys;
  Rng rng(derive_seed(seed, kStreamNoise));
  for (double& v : out.b) v += sigma * rng.gaussian();
  if (out.x_star) {
    Vector e = multiply(out.A, *out.x_star);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= out.b[i];
    out.e = std::move(e);
  } else {
    out.e.reset();
  }
  return out;
}

GeneratedSystem gen_instance(const GenSpec& spec) {
  GeneratedSystem g = gen_clustered_system(spec);
  if (spec.noise_sigma > 0.0)
    g.system = add_noise(g.system, spec.noise_sigma, spec.seed);
  return g;
}

void write_instance(const std::filesystem::path& dir,
                    const GeneratedSystem& gen, const GenSpec& spec,
                    MatrixFormat format) {
  std::filesystem::create_directories(dir);
  if (format == MatrixFormat::Csv)
    write_matrix_csv(gen.system.A, dir / "A.csv");
  else
    write_matrix_binary(gen.system.A, dir / "A.bin");
  write_vector_csv(gen.system.b, dir / "b.csv");
  if (gen.system.x_star)
    write_vector_csv(*gen.system.x_star, dir / "x_star.csv");
  {
    std::ofstream out(dir / "labels.csv");
    if (!out) throw IoError("cannot write labels.csv in " + dir.string());
    out << "row_index,cluster_index\n";
    for (std::size_t i = 0; i < gen.labels.size(); ++i)
      out << i << ',' << gen.labels[i] << '\n';
  }
  nlohmann::ordered_json j;
  j["n"] = spec.n;
  j["p"] = spec.p;
  j["k"] = spec.k;
  j["spread"] = spec.spread;
  j["noise_sigma"] = spec.noise_sigma;
  j["seed"] = spec.seed;
  std::ofstream out(dir / "spec.json");
  if (!out) throw IoError("cannot write spec.json in " + dir.string());
  out << j.dump(2) << '\n';
}

Instance read_instance(const std::filesystem::path& dir) {
  Instance inst;
  if (std::filesystem::exists(dir / "A.csv"))
    inst.system.A = read_matrix_csv(dir / "A.csv");
  else if (std::filesystem::exists(dir / "A.bin"))
    inst.system.A = read_matrix_binary(dir / "A.bin");
  else
    throw IoError("no A.csv or A.bin in " + dir.string());
  inst.system.b = read_vector_csv(dir / "b.csv");

  if (std::filesystem::exists(dir / "x_star.csv")) {
    inst.system.x_star = read_vector_csv(dir / "x_star.csv");
    Vector e = multiply(inst.system.A, *inst.system.x_star);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= inst.system.b[i];
    inst.system.e = std::move(e);
  }

  if (std::filesystem::exists(dir / "labels.csv")) {
    std::ifstream in(dir / "labels.csv");
    std::string line;
    if (!std::getline(in, line) || line != "row_index,cluster_index")
      throw IoError("bad labels.csv header in " + dir.string());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::size_t comma = line.find(',');
      if (comma == std::string::npos)
        throw IoError("bad labels.csv row in " + dir.string());
      inst.labels.push_back(std::stoull(line.substr(comma + 1)));
    }
  }

  if (std::filesystem::exists(dir / "spec.json")) {
    std::ifstream in(dir / "spec.json");
    nlohmann::json j;
    try {
      in >> j;
      GenSpec spec;
      spec.n = j.at("n").get<std::size_t>();
      spec.p = j.at("p").get<std::size_t>();
      spec.k = j.at("k").get<std::size_t>();
      spec.spread = j.at("spread").get<double>();
      spec.noise_sigma = j.at("noise_sigma").get<double>();
      spec.seed = j.at("seed").get<std::uint64_t>();
      inst.spec = spec;
    } catch (const nlohmann::json::exception& err) {
      throw IoError("bad spec.json in " + dir.string() + ": " + err.what());
    }
  }

  inst.system.validate();
  return inst;
}

}  // namespace kaczmarz::datagen
