#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sat/common.hpp"

namespace sat {

/// Dense row-major matrix of 64-bit floats. The only tensor rank the engine
/// needs; batched activations are stored as (batch*seq) x dim.
struct Matrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int64_t r, int64_t c) : rows(r), cols(c) {
    SAT_REQUIRE(r >= 0 && c >= 0, "Matrix: negative dimensions");
    data.assign(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0);
  }

  static Matrix zeros(int64_t r, int64_t c) { return Matrix(r, c); }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rws) {
    Matrix m(static_cast<int64_t>(rws.size()),
             rws.size() ? static_cast<int64_t>(rws.begin()->size()) : 0);
    int64_t i = 0;
    for (const auto& r : rws) {
      SAT_REQUIRE(static_cast<int64_t>(r.size()) == m.cols, "from_rows: ragged rows");
      int64_t j = 0;
      for (double v : r) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  int64_t size() const { return rows * cols; }

  double& operator()(int64_t i, int64_t j) { return data[static_cast<size_t>(i * cols + j)]; }
  double operator()(int64_t i, int64_t j) const { return data[static_cast<size_t>(i * cols + j)]; }

  double* row(int64_t i) { return data.data() + i * cols; }
  const double* row(int64_t i) const { return data.data() + i * cols; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  void set_zero() { std::fill(data.begin(), data.end(), 0.0); }

  /// Resize to r x c and zero. Reuses storage when the size matches.
  void reset(int64_t r, int64_t c) {
    rows = r;
    cols = c;
    data.assign(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0);
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Hard error on NaN/Inf; used when tensors enter from files.
  void require_finite(const std::string& what) const {
    SAT_REQUIRE_DATA(all_finite(), "non-finite value in tensor '" + what + "'");
  }
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

}  // namespace sat
