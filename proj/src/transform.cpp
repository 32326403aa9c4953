#include "stone/transform.hpp"

#include "stone/error.hpp"

#include <cmath>
#include <string>

namespace stone {

int log2_exact(std::size_t n) noexcept {
  if (!is_power_of_two(n)) return -1;
  int k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

bool is_power_of_two(std::size_t n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

int level_of_length(std::size_t n) noexcept {
  int b = log2_exact(n);
  if (b < 0 || b % 2 != 0) return -1;
  return b / 2;
}

std::size_t pow4(int k) noexcept { return std::size_t{1} << (2 * k); }

StoneVector::StoneVector(std::vector<double> data) : data_(std::move(data)) {
  level_ = level_of_length(data_.size());
  if (level_ < 0) {
    fail(ErrorCode::InvalidDimension,
         "vector length " + std::to_string(data_.size()) + " is not a power of 4");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite entry in StoneVector");
  }
}

StoneVector StoneVector::zeros(int level) {
  if (level < 0 || level > 15) fail(ErrorCode::InvalidDimension, "bad level");
  return StoneVector(std::vector<double>(pow4(level), 0.0));
}

void stone_transform_inplace(std::span<double> data) {
  const std::size_t n = data.size();
  if (level_of_length(n) < 0) {
    fail(ErrorCode::InvalidDimension,
         "transform length " + std::to_string(n) + " is not a power of 4");
  }
  double* x = data.data();
  for (std::size_t stride = 1; stride < n; stride *= 4) {
    const std::size_t span = 4 * stride;
    for (std::size_t base = 0; base < n; base += span) {
      double* a0 = x + base;
      double* a1 = a0 + stride;
      double* a2 = a1 + stride;
      double* a3 = a2 + stride;
      for (std::size_t j = 0; j < stride; ++j) {
        const double half = 0.5 * (((a0[j] + a1[j]) + a2[j]) + a3[j]);
        a0[j] = half - a0[j];
        a1[j] = half - a1[j];
        a2[j] = half - a2[j];
        a3[j] = half - a3[j];
      }
    }
  }
}

StoneVector stone_transform(const StoneVector& x) {
  std::vector<double> out = x.values();
  stone_transform_inplace(out);
  return StoneVector(std::move(out));
}

std::vector<double> stone_transform(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  stone_transform_inplace(out);
  return out;
}

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
  if (x.size() != cols) fail(ErrorCode::InvalidDimension, "matrix/vector size mismatch");
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = values.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

DenseMatrix dense_stone(int level, int cap) {
  if (level < 0) fail(ErrorCode::InvalidDimension, "negative level");
  if (level > cap) {
    fail(ErrorCode::ResourceLimit, "dense_stone level " + std::to_string(level) +
                                       " exceeds cap " + std::to_string(cap));
  }
  DenseMatrix m{1, 1, {1.0}};
  for (int k = 0; k < level; ++k) {
    // S_{4^{k+1}} = S_4 (x) S_{4^k}
    DenseMatrix next{4 * m.rows, 4 * m.cols, std::vector<double>(16 * m.rows * m.cols)};
    for (std::size_t bi = 0; bi < 4; ++bi)
      for (std::size_t bj = 0; bj < 4; ++bj)
        for (std::size_t i = 0; i < m.rows; ++i)
          for (std::size_t j = 0; j < m.cols; ++j)
            next(bi * m.rows + i, bj * m.cols + j) = kStencil[bi][bj] * m(i, j);
    m = std::move(next);
  }
  return m;
}

std::vector<int> stone_row_signs(int level, std::size_t row) {
  const std::size_t n = pow4(level);
  if (level < 0 || row >= n) fail(ErrorCode::InvalidDimension, "row out of range");
  // Entry (row, col) is the product over base-4 digits of the stencil entry,
  // which is negative exactly when the digits agree.
  std::vector<int> signs(n);
  for (std::size_t col = 0; col < n; ++col) {
    int sign = 1;
    std::size_t r = row, c = col;
    for (int k = 0; k < level; ++k, r >>= 2, c >>= 2) {
      if ((r & 3) == (c & 3)) sign = -sign;
    }
    signs[col] = sign;
  }
  return signs;
}

}  // namespace stone
