#pragma once

#include <iosfwd>
#include <string>

#include "tlsgn/dense_linalg.hpp"

namespace tlsgn::io {

/// Reads a dense matrix. The format follows the extension: ".mtx" is
/// Matrix Market array format (real general, column-major values), ".csv"
/// is headerless comma-separated rows. Throws io_error / parse_error.
Matrix read_matrix(const std::string& path);

/// Reads a vector: an m x 1 or 1 x m matrix in either format, or a flat
/// list of numbers separated by commas, whitespace or newlines.
Vector read_vector(const std::string& path);

Matrix parse_matrix_market(std::istream& in);
Matrix parse_csv(std::istream& in);

void write_matrix_market(std::ostream& out, const Matrix& m);
void write_matrix_market(const std::string& path, const Matrix& m);
void write_csv(std::ostream& out, const Matrix& m);

/// 17 significant digits, round-trip exact for doubles.
std::string format_double(double v);

}  // namespace tlsgn::io
