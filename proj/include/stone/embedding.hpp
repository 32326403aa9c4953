#pragma once

#include "stone/transform.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace stone {

/// Square grayscale image with power-of-two side, stored row-major.
class DyadicImage {
public:
  DyadicImage() : DyadicImage(1) {}
  explicit DyadicImage(std::size_t side, double fill = 0.0);
  DyadicImage(std::size_t side, std::vector<double> pixels);

  std::size_t side() const noexcept { return side_; }
  std::size_t pixel_count() const noexcept { return pixels_.size(); }

  double& at(std::size_t row, std::size_t col) { return pixels_[row * side_ + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels_[row * side_ + col]; }

  std::span<double> pixels() noexcept { return pixels_; }
  std::span<const double> pixels() const noexcept { return pixels_; }

  double max_value() const;

  friend bool operator==(const DyadicImage&, const DyadicImage&) = default;

private:
  std::size_t side_;
  std::vector<double> pixels_;
};

/// Nested-dissection pixel numbering. Panels are visited clockwise from the
/// top-left (TL, TR, BR, BL) at every level of the recursion, so every
/// aligned dyadic patch occupies one contiguous index range.
class PixelOrdering {
public:
  explicit PixelOrdering(std::size_t side);

  std::size_t side() const noexcept { return side_; }
  std::size_t size() const noexcept { return index_of_.size(); }

  /// Vector index of pixel (row, col).
  std::uint32_t index(std::size_t row, std::size_t col) const {
    return index_of_[row * side_ + col];
  }
  /// Row-major pixel offset holding vector entry `idx`.
  std::uint32_t pixel_of(std::size_t idx) const { return pixel_of_[idx]; }

  std::span<const std::uint32_t> table() const noexcept { return index_of_; }

  /// One line per pixel: "row col index", row-major.
  void write_text(std::ostream& os) const;

private:
  std::size_t side_;
  std::vector<std::uint32_t> index_of_;  // row-major pixel -> vector index
  std::vector<std::uint32_t> pixel_of_;  // vector index -> row-major pixel
};

PixelOrdering build_pixel_ordering(std::size_t side);

StoneVector vectorize(const DyadicImage& img, const PixelOrdering& ord);
DyadicImage devectorize(const StoneVector& vec, const PixelOrdering& ord);

void vectorize_into(std::span<const double> image, const PixelOrdering& ord,
                    std::span<double> out);
void devectorize_into(std::span<const double> vec, const PixelOrdering& ord,
                      std::span<double> image);

struct ProlongationSpec {
  std::size_t fine_side;
  std::size_t coarse_side;

  ProlongationSpec(std::size_t fine, std::size_t coarse);
  std::size_t ratio() const noexcept { return fine_side / coarse_side; }
  std::size_t block_length() const noexcept { return ratio() * ratio(); }
};

/// Replicates each coarse entry delta^2 times contiguously.
StoneVector prolong(const StoneVector& coarse, const ProlongationSpec& spec);

/// Block mean over each contiguous run of delta^2 fine entries. A left inverse
/// of prolong; <prolong(x), y> = delta^2 <x, restrict_mean(y)>.
StoneVector restrict_mean(const StoneVector& fine, const ProlongationSpec& spec);

/// Block-mean downsample in the image domain (restrict_mean through the ordering).
DyadicImage downsample_mean(const DyadicImage& img, std::size_t coarse_side);
/// Nearest-neighbour upsample in the image domain.
DyadicImage upsample_nearest(const DyadicImage& img, std::size_t fine_side);

}  // namespace stone
