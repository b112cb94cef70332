#pragma once
#include <cstddef>
#include <vector>

namespace rollcast {

// Dense row-major matrix of doubles. Rows are snapshots, columns are channels
// nearly everywhere in this codebase.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(std::size_t(r) * c, fill) {}

  double& operator()(int r, int c) { return v[std::size_t(r) * cols + c]; }
  double operator()(int r, int c) const { return v[std::size_t(r) * cols + c]; }
  double* row(int r) { return v.data() + std::size_t(r) * cols; }
  const double* row(int r) const { return v.data() + std::size_t(r) * cols; }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

using Vec = std::vector<double>;

}  // namespace rollcast
