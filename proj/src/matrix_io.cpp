#include "tropfact/matrix_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "tropfact/errors.hpp"

namespace tropfact {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_value(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token == "-inf") return kBottom;
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty() || !std::isfinite(value)) {
    throw ParseError("invalid matrix entry '" + std::string(token) + "'", line);
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_value(double x) {
  if (is_bottom(x)) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

MaxPlusMatrix read_matrix(std::istream& in) {
  std::vector<double> entries;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = body.find(',', start);
      entries.push_back(parse_value(body.substr(start, comma - start), line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError("expected " + std::to_string(cols) + " columns, found " +
                           std::to_string(count),
                       line_no);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("empty matrix");
  return MaxPlusMatrix(rows, cols, std::move(entries));
}

MaxPlusMatrix read_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const MaxPlusMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_value(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix(const std::filesystem::path& path, const MaxPlusMatrix& m) {
  auto out = open_output(path);
  write_matrix(out, m);
}

Eigen::MatrixXd read_real_matrix(const std::filesystem::path& path) {
  const MaxPlusMatrix m = read_matrix(path);
  if (!m.all_finite()) throw ParseError(path.string() + ": real matrix with -inf entry");
  return to_eigen(m);
}

void write_real_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  write_matrix(path, from_eigen(m));
}

ObservationMask read_mask(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  auto in = open_input(path);
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const std::size_t comma = body.find(',');
    if (comma == std::string_view::npos) throw ParseError("mask line needs i,j", line_no);
    std::size_t idx[2] = {0, 0};
    const std::string_view parts[2] = {trim(body.substr(0, comma)), trim(body.substr(comma + 1))};
    for (int k = 0; k < 2; ++k) {
      const char* end = parts[k].data() + parts[k].size();
      auto [ptr, ec] = std::from_chars(parts[k].data(), end, idx[k]);
      if (ec != std::errc() || ptr != end) throw ParseError("invalid mask index", line_no);
    }
    if (idx[0] >= rows || idx[1] >= cols) throw ParseError("mask cell out of range", line_no);
    cells.emplace_back(idx[0], idx[1]);
  }
  return ObservationMask(rows, cols, cells);
}

void write_mask(const std::filesystem::path& path, const ObservationMask& mask) {
  auto out = open_output(path);
  for (std::size_t k : mask.cells()) out << k / mask.cols() << ',' << k % mask.cols() << '\n';
}

void write_trace(const std::filesystem::path& path, const Trace& trace) {
  auto out = open_output(path);
  out << "iteration,objective\n";
  for (const auto& [k, value] : trace) out << k << ',' << format_value(value) << '\n';
}

Eigen::MatrixXd to_eigen(const MaxPlusMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

MaxPlusMatrix from_eigen(const Eigen::MatrixXd& m) {
  MaxPlusMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

}  // namespace tropfact
