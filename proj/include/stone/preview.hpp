#pragma once

#include "stone/embedding.hpp"
#include "stone/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace stone {

struct WindowSample {
  std::uint32_t row_index;
  double value;
};

/// Low-resolution coefficient set: the mean of every sampled row in each
/// group floor(row / delta^2), delta = N / n.
struct RebinnedCoefficients {
  std::size_t fine_side = 0;
  std::size_t coarse_side = 0;
  std::vector<double> values;
  std::vector<std::uint32_t> counts;

  std::vector<std::size_t> empty_groups() const;
};

/// Does not throw on empty groups; `preview` does.
RebinnedCoefficients rebin_partial(std::span<const WindowSample> window, std::size_t fine_side,
                                   std::size_t coarse_side);
/// Throws IncompletePreviewError listing empty groups.
RebinnedCoefficients rebin(std::span<const WindowSample> window, std::size_t fine_side,
                           std::size_t coarse_side);

struct PreviewImage {
  DyadicImage image;
  std::uint64_t window_start = 0;
  std::size_t window_count = 0;
  std::size_t source_side = 0;
  std::size_t bins_hit = 0;
};

PreviewImage preview(const RebinnedCoefficients& rebinned, const PixelOrdering& ordering);
PreviewImage preview(const RebinnedCoefficients& rebinned);

/// Preview from the n^2 most recent records ending at `at_position`.
PreviewImage preview_from_stream(const MeasurementStream& stream, std::uint64_t at_position,
                                 std::size_t n);

}  // namespace stone
