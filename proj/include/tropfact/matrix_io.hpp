#pragma once

// Text formats shared by every solver.
//
// Matrices: CSV, one row per line, comma separated, finite values printed
// with 17 significant digits and the literal token `-inf` for the bottom
// element. Masks: one `i,j` pair (0-based) per line. Traces:
// `iteration,objective` with a header line.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tropfact/maxplus.hpp"

namespace tropfact {

std::string format_value(double x);

MaxPlusMatrix read_matrix(std::istream& in);
MaxPlusMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(std::ostream& out, const MaxPlusMatrix& m);
void write_matrix(const std::filesystem::path& path, const MaxPlusMatrix& m);

// Ordinary real matrices use the same layout; bottom tokens are rejected.
Eigen::MatrixXd read_real_matrix(const std::filesystem::path& path);
void write_real_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

ObservationMask read_mask(const std::filesystem::path& path, std::size_t rows, std::size_t cols);
void write_mask(const std::filesystem::path& path, const ObservationMask& mask);

using Trace = std::vector<std::pair<std::size_t, double>>;
void write_trace(const std::filesystem::path& path, const Trace& trace);

Eigen::MatrixXd to_eigen(const MaxPlusMatrix& m);
MaxPlusMatrix from_eigen(const Eigen::MatrixXd& m);

}  // namespace tropfact
