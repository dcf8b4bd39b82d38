#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace incdyn {

/// Shortest round-trip decimal representation (std::to_chars), so written
/// tables are byte-stable and parse back exactly.
std::string format_double(double v);

/// 64-bit FNV-1a over a byte string, hex-encoded.
std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

/// Renders a CSV table; `columns` are the header names, one row per entry.
std::string render_csv(const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows);

/// Column-major convenience overload: first column plus a matrix.
std::string render_csv(const std::string& index_name, const std::vector<double>& index,
                       const std::vector<std::string>& value_columns, const Eigen::MatrixXd& values);

/// Atomic file write (temp + rename).
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace incdyn
