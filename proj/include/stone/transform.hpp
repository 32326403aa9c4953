#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace stone {

/// Returns k if n == 4^k, otherwise -1.
int level_of_length(std::size_t n) noexcept;
/// Returns K if n == 2^K, otherwise -1.
int log2_exact(std::size_t n) noexcept;
bool is_power_of_two(std::size_t n) noexcept;
std::size_t pow4(int k) noexcept;

/// Flat coefficient or pixel vector of length 4^k, in nested-dissection order.
class StoneVector {
public:
  StoneVector() : data_(1, 0.0) {}
  explicit StoneVector(std::vector<double> data);
  static StoneVector zeros(int level);

  int level() const noexcept { return level_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

private:
  std::vector<double> data_;
  int level_ = 0;
};

/// The 4x4 sum-to-one stencil. Symmetric, rows sum to one, squares to I.
inline constexpr std::array<std::array<double, 4>, 4> kStencil{{
    {-0.5, 0.5, 0.5, 0.5},
    {0.5, -0.5, 0.5, 0.5},
    {0.5, 0.5, -0.5, 0.5},
    {0.5, 0.5, 0.5, -0.5},
}};

/// In-place fast transform. `data.size()` must be a power of four.
/// Runs one radix-4 butterfly pass per level, finest stride first.
void stone_transform_inplace(std::span<double> data);

StoneVector stone_transform(const StoneVector& x);
std::vector<double> stone_transform(std::span<const double> x);

/// Row-major dense matrix used by the reference construction.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  std::vector<double> apply(std::span<const double> x) const;
};

inline constexpr int kDenseStoneDefaultCap = 5;

/// Explicit Kronecker-power matrix S_{4^level}. For tests and tiny instances.
DenseMatrix dense_stone(int level, int cap = kDenseStoneDefaultCap);

/// Entries of row `row` of S_{4^level} as signs (+1/-1); the actual entry is
/// sign * 2^-level. Integers so a hardware pattern can be emitted exactly.
std::vector<int> stone_row_signs(int level, std::size_t row);

}  // namespace stone
