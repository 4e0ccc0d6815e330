#pragma once

#include "cosci/simgen.hpp"

#include <iosfwd>
#include <string>

namespace cosci {

/// Reads a comma-separated numeric matrix. Rows are observations unless
/// `transpose` is set, in which case each row is one feature. With a header,
/// non-transposed files take feature names from it; otherwise names are f1..fp.
/// Throws InputError naming the row and column of the first bad cell.
DatasetMatrix ingest_matrix(const std::string& path, bool has_header, bool transpose);
DatasetMatrix ingest_matrix(std::istream& in, bool has_header, bool transpose);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_double(double value);

/// Writes observations as rows with a header of feature names.
void write_matrix_csv(const std::string& path, const DatasetMatrix& matrix);
void write_matrix_csv(std::ostream& out, const DatasetMatrix& matrix);

}  // namespace cosci
