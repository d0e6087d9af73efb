#pragma once

#include <filesystem>
#include <string>

#include "kaczmarz/dense_matrix.hpp"

namespace kaczmarz {

/// Shortest decimal string that round-trips to the same double. Used for
/// every numeric field we persist, so rereading a CSV reproduces the value
/// bit for bit.
std::string format_double(double v);

/// CSV matrix format: one row per line, comma-separated '.'-decimal reals,
/// no header. Values are written with format_double.
DenseMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const DenseMatrix& m, const std::filesystem::path& path);

/// Binary matrix format: little-endian {u64 n_rows, u64 n_cols} header
/// followed by row-major little-endian IEEE-754 doubles.
DenseMatrix read_matrix_binary(const std::filesystem::path& path);
void write_matrix_binary(const DenseMatrix& m, const std::filesystem::path& path);

/// Vectors as CSV: one value per line.
Vector read_vector_csv(const std::filesystem::path& path);
void write_vector_csv(const Vector& v, const std::filesystem::path& path);

}  // namespace kaczmarz
