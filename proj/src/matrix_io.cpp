#include "kaczmarz/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "kaczmarz/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary matrix format assumes a little-endian host");

namespace kaczmarz {

namespace {

double parse_double(std::string_view token, const std::filesystem::path& path) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw IoError("malformed number '" + std::string(token) + "' in " +
                  path.string());
  return v;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw IoError("format_double: conversion failed");
  return {buf, ptr};
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, false);
  std::vector<double> entries;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
    std::size_t cols = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view token(line.data() + start,
                             (comma == std::string::npos ? line.size() : comma) -
                                 start);
      entries.push_back(parse_double(token, path));
      ++cols;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (n_rows == 0)
      n_cols = cols;
    else if (cols != n_cols)
      throw IoError("ragged rows in " + path.string());
    ++n_rows;
  }
  if (n_rows == 0) throw IoError("empty matrix file " + path.string());
  DenseMatrix m(n_rows, n_cols, std::move(entries));
  if (!m.all_finite())
    throw IoError("non-finite entry in " + path.string());
  return m;
}

void write_matrix_csv(const DenseMatrix& m, const std::filesystem::path& path) {
  std::ofstream out = open_out(path, false);
  std::string line;
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < m.n_cols(); ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

DenseMatrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, true);
  std::uint64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in) throw IoError("truncated header in " + path.string());
  const std::uint64_t count = dims[0] * dims[1];
  if (dims[0] == 0 || dims[1] == 0 || count > (1ull << 32))
    throw IoError("implausible dimensions in " + path.string());
  std::vector<double> entries(count);
  in.read(reinterpret_cast<char*>(entries.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw IoError("truncated payload in " + path.string());
  DenseMatrix m(dims[0], dims[1], std::move(entries));
  if (!m.all_finite())
    throw IoError("non-finite entry in " + path.string());
  return m;
}

void write_matrix_binary(const DenseMatrix& m,
                         const std::filesystem::path& path) {
  std::ofstream out = open_out(path, true);
  const std::uint64_t dims[2] = {m.n_rows(), m.n_cols()};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(m.entries().data()),
            static_cast<std::streamsize>(m.entries().size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

Vector read_vector_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, false);
  Vector v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    v.push_back(parse_double(line, path));
  }
  if (v.empty()) throw IoError("empty vector file " + path.string());
  return v;
}

void write_vector_csv(const Vector& v, const std::filesystem::path& path) {
  std::ofstream out = open_out(path, false);
  for (double x : v) out << format_double(x) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace kaczmarz
