#pragma once

#include <cstddef>
#include <vector>

#include "synthattr/common/errors.hpp"

namespace synthattr {

// Row-major N x d matrix of doubles; the currency of the classical models
// and the analysis module.
struct Matrix {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : values(r * c, 0.0), rows(r), cols(c) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double* row(std::size_t r) { return values.data() + r * cols; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows_in) {
    if (rows_in.empty()) return {};
    Matrix m(rows_in.size(), rows_in.front().size());
    for (std::size_t r = 0; r < rows_in.size(); ++r) {
      if (rows_in[r].size() != m.cols)
        throw DimensionMismatch("ragged rows in matrix");
      for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = rows_in[r][c];
    }
    return m;
  }
};

}  // namespace synthattr
