#include "stone/embedding.hpp"

#include "stone/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace stone {

namespace {

void require_dyadic_side(std::size_t side, const char* what) {
  if (!is_power_of_two(side)) {
    fail(ErrorCode::InvalidDimension,
         std::string(what) + " side " + std::to_string(side) + " is not a power of two");
  }
}

// Panel offsets in clockwise order: top-left, top-right, bottom-right, bottom-left.
constexpr std::size_t kPanelRow[4] = {0, 0, 1, 1};
constexpr std::size_t kPanelCol[4] = {0, 1, 1, 0};

void assign(std::vector<std::uint32_t>& table, std::size_t full_side, std::size_t row0,
            std::size_t col0, std::size_t side, std::uint32_t lowest) {
  if (side == 1) {
    table[row0 * full_side + col0] = lowest;
    return;
  }
  const std::size_t half = side / 2;
  const auto quarter = static_cast<std::uint32_t>(half * half);
  for (std::size_t p = 0; p < 4; ++p) {
    assign(table, full_side, row0 + kPanelRow[p] * half, col0 + kPanelCol[p] * half, half,
           lowest + static_cast<std::uint32_t>(p) * quarter);
  }
}

}  // namespace

DyadicImage::DyadicImage(std::size_t side, double fill) : side_(side) {
  require_dyadic_side(side, "image");
  pixels_.assign(side * side, fill);
}

DyadicImage::DyadicImage(std::size_t side, std::vector<double> pixels)
    : side_(side), pixels_(std::move(pixels)) {
  require_dyadic_side(side, "image");
  if (pixels_.size() != side * side) {
    fail(ErrorCode::InvalidDimension, "pixel count does not match side");
  }
  for (double v : pixels_) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite pixel intensity");
  }
}

double DyadicImage::max_value() const {
  return *std::max_element(pixels_.begin(), pixels_.end());
}

PixelOrdering::PixelOrdering(std::size_t side) : side_(side) {
  require_dyadic_side(side, "ordering");
  if (side > (std::size_t{1} << 15)) fail(ErrorCode::ResourceLimit, "ordering side too large");
  index_of_.resize(side * side);
  assign(index_of_, side, 0, 0, side, 0);
  pixel_of_.resize(side * side);
  for (std::size_t p = 0; p < index_of_.size(); ++p) {
    pixel_of_[index_of_[p]] = static_cast<std::uint32_t>(p);
  }
}

void PixelOrdering::write_text(std::ostream& os) const {
  for (std::size_t r = 0; r < side_; ++r)
    for (std::size_t c = 0; c < side_; ++c) os << r << ' ' << c << ' ' << index(r, c) << '\n';
}

PixelOrdering build_pixel_ordering(std::size_t side) { return PixelOrdering(side); }

void vectorize_into(std::span<const double> image, const PixelOrdering& ord,
                    std::span<double> out) {
  if (image.size() != ord.size() || out.size() != ord.size()) {
    fail(ErrorCode::InvalidDimension, "image/ordering size mismatch");
  }
  auto table = ord.table();
  for (std::size_t p = 0; p < image.size(); ++p) out[table[p]] = image[p];
}

void devectorize_into(std::span<const double> vec, const PixelOrdering& ord,
                      std::span<double> image) {
  if (vec.size() != ord.size() || image.size() != ord.size()) {
    fail(ErrorCode::InvalidDimension, "vector/ordering size mismatch");
  }
  auto table = ord.table();
  for (std::size_t p = 0; p < image.size(); ++p) image[p] = vec[table[p]];
}

StoneVector vectorize(const DyadicImage& img, const PixelOrdering& ord) {
  if (img.side() != ord.side()) {
    fail(ErrorCode::InvalidDimension, "image side " + std::to_string(img.side()) +
                                          " does not match ordering side " +
                                          std::to_string(ord.side()));
  }
  std::vector<double> out(ord.size());
  vectorize_into(img.pixels(), ord, out);
  return StoneVector(std::move(out));
}

DyadicImage devectorize(const StoneVector& vec, const PixelOrdering& ord) {
  if (vec.size() != ord.size()) {
    fail(ErrorCode::InvalidDimension, "vector length does not match ordering");
  }
  DyadicImage img(ord.side());
  devectorize_into(vec.span(), ord, img.pixels());
  return img;
}

ProlongationSpec::ProlongationSpec(std::size_t fine, std::size_t coarse)
    : fine_side(fine), coarse_side(coarse) {
  require_dyadic_side(fine, "fine");
  require_dyadic_side(coarse, "coarse");
  if (coarse > fine) fail(ErrorCode::InvalidDimension, "coarse side exceeds fine side");
}

StoneVector prolong(const StoneVector& coarse, const ProlongationSpec& spec) {
  if (coarse.size() != spec.coarse_side * spec.coarse_side) {
    fail(ErrorCode::InvalidDimension, "coarse vector length inconsistent with prolongation");
  }
  const std::size_t block = spec.block_length();
  std::vector<double> out(coarse.size() * block);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(i * block), block, coarse[i]);
  }
  return StoneVector(std::move(out));
}

StoneVector restrict_mean(const StoneVector& fine, const ProlongationSpec& spec) {
  if (fine.size() != spec.fine_side * spec.fine_side) {
    fail(ErrorCode::InvalidDimension, "fine vector length inconsistent with prolongation");
  }
  const std::size_t block = spec.block_length();
  const std::size_t groups = spec.coarse_side * spec.coarse_side;
  std::vector<double> out(groups);
  std::vector<double> scratch(block);
  for (std::size_t g = 0; g < groups; ++g) {
    // Pairwise sum: exact for replicated entries, so restrict(prolong(x)) == x.
    std::copy_n(fine.span().begin() + static_cast<std::ptrdiff_t>(g * block), block, scratch.begin());
    for (std::size_t width = block; width > 1; width /= 2)
      for (std::size_t j = 0; j < width / 2; ++j) scratch[j] = scratch[2 * j] + scratch[2 * j + 1];
    out[g] = scratch[0] / static_cast<double>(block);
  }
  return StoneVector(std::move(out));
}

DyadicImage downsample_mean(const DyadicImage& img, std::size_t coarse_side) {
  ProlongationSpec spec(img.side(), coarse_side);
  const std::size_t d = spec.ratio();
  DyadicImage out(coarse_side);
  for (std::size_t r = 0; r < coarse_side; ++r)
    for (std::size_t c = 0; c < coarse_side; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) acc += img.at(r * d + i, c * d + j);
      out.at(r, c) = acc / static_cast<double>(d * d);
    }
  return out;
}

DyadicImage upsample_nearest(const DyadicImage& img, std::size_t fine_side) {
  ProlongationSpec spec(fine_side, img.side());
  const std::size_t d = spec.ratio();
  DyadicImage out(fine_side);
  for (std::size_t r = 0; r < fine_side; ++r)
    for (std::size_t c = 0; c < fine_side; ++c) out.at(r, c) = img.at(r / d, c / d);
  return out;
}

}  // namespace stone
