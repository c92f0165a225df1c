// Plain-text instance files consumed by the `solve` subcommand.
//
// Format: optional '#' comment lines, then a header line
//   <rows_qt> <cols_qt> <cols_yt>
// followed by rows_qt * cols_qt whitespace-separated values for the operator
// and rows_qt * cols_yt values for the observation, row-major.
#pragma once

#include <string>
#include <utility>

#include "jade/types.hpp"

namespace jade::io {

struct Instance {
  RealMatrix Qt;  // 2L x 2N
  RealMatrix Yt;  // 2L x M
};

void write_instance(const std::string& path, const RealMatrix& Qt, const RealMatrix& Yt);
Instance read_instance(const std::string& path);

// Matrix dump: one comment line with the shape, then rows of comma-separated
// values.
void write_matrix_csv(const std::string& path, const RealMatrix& A);

}  // namespace jade::io
