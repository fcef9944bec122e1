#include "tlsgn/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "tlsgn/error.hpp"

namespace tlsgn::io {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double parse_number(const std::string& token, long line) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw Error(ErrorCode::parse_error,
                "line " + std::to_string(line) + ": not a number: '" + token + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  return in;
}

}  // namespace

Matrix parse_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line))
    throw Error(ErrorCode::parse_error, "empty Matrix Market stream");
  ++lineno;
  std::istringstream header(lower(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix")
    throw Error(ErrorCode::parse_error, "missing %%MatrixMarket matrix banner");
  if (format != "array")
    throw Error(ErrorCode::parse_error, "only the array format is supported, got '" + format + "'");
  if (field != "real" && field != "double" && field != "integer")
    throw Error(ErrorCode::parse_error, "unsupported field '" + field + "'");
  if (!symmetry.empty() && symmetry != "general")
    throw Error(ErrorCode::parse_error, "unsupported symmetry '" + symmetry + "'");

  long rows = -1, cols = -1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    std::istringstream size(t);
    if (!(size >> rows >> cols) || rows < 0 || cols < 0)
      throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": bad size line");
    break;
  }
  if (rows < 0) throw Error(ErrorCode::parse_error, "missing size line");

  Matrix m(rows, cols);
  long count = 0;
  const long total = rows * cols;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    std::istringstream tokens(t);
    std::string tok;
    while (tokens >> tok) {
      if (count >= total)
        throw Error(ErrorCode::parse_error, "more than " + std::to_string(total) + " values");
      m(count % rows, count / rows) = parse_number(tok, lineno);
      ++count;
    }
  }
  if (count != total)
    throw Error(ErrorCode::parse_error, "expected " + std::to_string(total) + " values, found " +
                                            std::to_string(count));
  return m;
}

Matrix parse_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_number(trim(cell), lineno));
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": expected " +
                                              std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Matrix read_matrix(const std::string& path) {
  const std::string ext = lower(path);
  std::ifstream in = open(path);
  if (ends_with(ext, ".mtx")) return parse_matrix_market(in);
  if (ends_with(ext, ".csv")) return parse_csv(in);
  throw Error(ErrorCode::parse_error, "unknown matrix extension for '" + path + "' (use .mtx or .csv)");
}

Vector read_vector(const std::string& path) {
  const std::string ext = lower(path);
  if (ends_with(ext, ".mtx")) {
    const Matrix m = read_matrix(path);
    if (m.cols() != 1 && m.rows() != 1)
      throw Error(ErrorCode::parse_error, "'" + path + "' is not a vector");
    return Eigen::Map<const Vector>(m.data(), m.size());
  }
  // Flat list: any mix of commas, whitespace and newlines.
  std::ifstream in = open(path);
  std::vector<double> values;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == '%') continue;
    std::string cleaned = t;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream tokens(cleaned);
    std::string tok;
    while (tokens >> tok) values.push_back(parse_number(tok, lineno));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_matrix_market(std::ostream& out, const Matrix& m) {
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << " " << m.cols() << "\n";
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out << format_double(m(i, j)) << "\n";
}

void write_matrix_market(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  write_matrix_market(out, m);
}

void write_csv(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_double(m(i, j));
    }
    out << "\n";
  }
}

}  // namespace tlsgn::io
