#include "stone/preview.hpp"

#include "stone/error.hpp"

#include <string>

namespace stone {

std::vector<std::size_t> RebinnedCoefficients::empty_groups() const {
  std::vector<std::size_t> empty;
  for (std::size_t g = 0; g < counts.size(); ++g)
    if (counts[g] == 0) empty.push_back(g);
  return empty;
}

RebinnedCoefficients rebin_partial(std::span<const WindowSample> window, std::size_t fine_side,
                                   std::size_t coarse_side) {
  const ProlongationSpec spec(fine_side, coarse_side);
  const std::size_t block = spec.block_length();
  const std::size_t groups = coarse_side * coarse_side;
  RebinnedCoefficients out{fine_side, coarse_side, std::vector<double>(groups, 0.0),
                           std::vector<std::uint32_t>(groups, 0)};
  for (const auto& s : window) {
    if (s.row_index >= fine_side * fine_side) {
      fail(ErrorCode::InvalidDimension, "row index " + std::to_string(s.row_index) + " out of range");
    }
    const std::size_t g = s.row_index / block;
    out.values[g] += s.value;
    ++out.counts[g];
  }
  for (std::size_t g = 0; g < groups; ++g)
    if (out.counts[g] > 0) out.values[g] /= out.counts[g];
  return out;
}

RebinnedCoefficients rebin(std::span<const WindowSample> window, std::size_t fine_side,
                           std::size_t coarse_side) {
  RebinnedCoefficients out = rebin_partial(window, fine_side, coarse_side);
  auto empty = out.empty_groups();
  if (!empty.empty()) throw IncompletePreviewError(std::move(empty));
  return out;
}

PreviewImage preview(const RebinnedCoefficients& rebinned, const PixelOrdering& ordering) {
  if (ordering.side() != rebinned.coarse_side) {
    fail(ErrorCode::InvalidDimension, "ordering side does not match preview side");
  }
  auto empty = rebinned.empty_groups();
  if (!empty.empty()) throw IncompletePreviewError(std::move(empty));
  std::vector<double> u = rebinned.values;
  stone_transform_inplace(u);
  PreviewImage out;
  out.image = DyadicImage(rebinned.coarse_side);
  devectorize_into(u, ordering, out.image.pixels());
  out.source_side = rebinned.fine_side;
  out.bins_hit = rebinned.counts.size();
  for (auto c : rebinned.counts) out.window_count += c;
  return out;
}

PreviewImage preview(const RebinnedCoefficients& rebinned) {
  return preview(rebinned, PixelOrdering(rebinned.coarse_side));
}

PreviewImage preview_from_stream(const MeasurementStream& stream, std::uint64_t at_position,
                                 std::size_t n) {
  if (!is_power_of_two(n) || n > stream.side) {
    fail(ErrorCode::InvalidDimension, "preview side " + std::to_string(n) +
                                          " must be a power of two no larger than " +
                                          std::to_string(stream.side));
  }
  const std::size_t count = n * n;
  const std::size_t end = stream.find_position(at_position);
  if (end == stream.records.size()) {
    fail(ErrorCode::InvalidWindow, "no record at position " + std::to_string(at_position));
  }
  if (end + 1 < count) {
    fail(ErrorCode::InvalidWindow, "insufficient history: need " + std::to_string(count) +
                                       " records ending at position " +
                                       std::to_string(at_position));
  }
  const std::size_t first = end + 1 - count;
  std::vector<WindowSample> window;
  window.reserve(count);
  for (std::size_t i = first; i <= end; ++i) {
    window.push_back({stream.records[i].row_index, stream.records[i].value});
  }
  PreviewImage out = preview(rebin(window, stream.side, n));
  out.window_start = stream.records[first].position;
  out.window_count = count;
  return out;
}

}  // namespace stone
