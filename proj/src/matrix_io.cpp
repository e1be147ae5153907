#include "bstab/matrix_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bstab {

namespace {

Complex parse_entry(const std::string& tok, const std::string& where) {
  const char* s = tok.c_str();
  char* end = nullptr;
  errno = 0;
  const double first = std::strtod(s, &end);
  if (end == s) throw ConfigError(where + ": cannot parse entry '" + tok + "'");
  if (*end == '\0') return {first, 0.0};
  if (*end == 'i' && end[1] == '\0') return {0.0, first};
  const char* rest = end;
  const double second = std::strtod(rest, &end);
  if (end == rest || (*rest != '+' && *rest != '-') || *end != 'i' || end[1] != '\0')
    throw ConfigError(where + ": cannot parse entry '" + tok + "'");
  return {first, second};
}

}  // namespace

CMatrix parse_matrix(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  Eigen::Index rows = -1, cols = -1, row = 0;
  CMatrix m;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (rows < 0) {
      if (!(ls >> rows >> cols) || rows < 1 || cols < 1)
        throw ConfigError(where + ": expected a 'rows cols' header with positive sizes");
      m.resize(rows, cols);
      continue;
    }
    if (row >= rows) throw ConfigError(where + ": more than " + std::to_string(rows) + " rows");
    std::string tok;
    Eigen::Index c = 0;
    while (ls >> tok) {
      if (c >= cols) throw ConfigError(where + ": more than " + std::to_string(cols) + " entries in row");
      m(row, c++) = parse_entry(tok, where);
    }
    if (c != cols)
      throw ConfigError(where + ": expected " + std::to_string(cols) + " entries, found " + std::to_string(c));
    ++row;
  }
  if (rows < 0) throw ConfigError(source + ": empty matrix file");
  if (row != rows)
    throw ConfigError(source + ": expected " + std::to_string(rows) + " rows, found " + std::to_string(row));
  if (!all_finite(m)) throw ConfigError(source + ": non-finite entries");
  return m;
}

CMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_matrix(buf.str(), path.string());
}

std::string format_matrix(const CMatrix& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  char buf[96];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const Complex z = m(i, j);
      if (z.imag() == 0.0)
        std::snprintf(buf, sizeof buf, "%.17g", z.real());
      else
        std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
      if (j > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_matrix(const std::filesystem::path& path, const CMatrix& m) { write_file_atomic(path, format_matrix(m)); }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace bstab
