#include "jade/instance_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace jade::io {

namespace {

void write_values(std::ostream& os, const RealMatrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) os << ' ';
      os << A(i, j);
    }
    os << '\n';
  }
}

void read_values(std::istream& is, RealMatrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (!(is >> A(i, j))) throw std::runtime_error("instance file: truncated values");
}

}  // namespace

void write_instance(const std::string& path, const RealMatrix& Qt, const RealMatrix& Yt) {
  if (Qt.rows() != Yt.rows()) throw std::invalid_argument("write_instance: row mismatch");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_instance: cannot open " + path);
  os << std::setprecision(17);
  os << "# jade instance v1\n";
  os << Qt.rows() << ' ' << Qt.cols() << ' ' << Yt.cols() << '\n';
  write_values(os, Qt);
  write_values(os, Yt);
  if (!os) throw std::runtime_error("write_instance: write failure on " + path);
}

Instance read_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_instance: cannot open " + path);
  std::string line;
  while (std::getline(is, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    break;
  }
  std::istringstream header(line);
  Eigen::Index rows = 0, cols_q = 0, cols_y = 0;
  if (!(header >> rows >> cols_q >> cols_y) || rows < 1 || cols_q < 1 || cols_y < 1)
    throw std::runtime_error("read_instance: bad header in " + path);
  Instance inst;
  inst.Qt.resize(rows, cols_q);
  inst.Yt.resize(rows, cols_y);
  read_values(is, inst.Qt);
  read_values(is, inst.Yt);
  return inst;
}

void write_matrix_csv(const std::string& path, const RealMatrix& A) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_matrix_csv: cannot open " + path);
  os << std::setprecision(17);
  os << "# rows=" << A.rows() << " cols=" << A.cols() << '\n';
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) os << ',';
      os << A(i, j);
    }
    os << '\n';
  }
}

}  // namespace jade::io
