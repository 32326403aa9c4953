#pragma once

#include "stone/embedding.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace stone {

/// Identifier of the generator used for schedules and noise, recorded in
/// stream headers. 1 = std::mt19937_64.
inline constexpr std::uint32_t kPrngMt19937_64 = 1;

/// Structured-random acquisition order over the rows of S_{N^2}. Any n^2
/// consecutive entries (cyclically) hit n^2 distinct groups floor(k / (N/n)^2).
class MeasurementSchedule {
public:
  MeasurementSchedule(std::size_t side, std::uint64_t seed, std::vector<std::uint32_t> order);

  std::size_t side() const noexcept { return side_; }
  std::size_t length() const noexcept { return order_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const std::uint32_t> order() const noexcept { return order_; }

  /// Row measured at stream position p; loops around after N^2 entries.
  std::uint32_t row_at(std::uint64_t position) const {
    return order_[static_cast<std::size_t>(position % order_.size())];
  }

private:
  std::size_t side_;
  std::uint64_t seed_;
  std::vector<std::uint32_t> order_;
};

MeasurementSchedule build_schedule(std::size_t side, std::uint64_t seed);

/// Rows sampled within one window. Multiplicity is kept as given.
struct RowSelector {
  std::size_t side = 0;
  std::vector<std::uint32_t> rows;
};

RowSelector selector_from_window(const MeasurementSchedule& sched, std::uint64_t start,
                                 std::size_t count);

struct MeasurementRecord {
  std::uint64_t position;
  std::uint32_t row_index;
  double value;

  friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

struct MeasurementStream {
  std::size_t side = 0;
  std::uint32_t measurements_per_frame = 0;
  std::uint32_t frame_count = 0;
  std::uint64_t schedule_seed = 0;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
  std::uint32_t prng_id = kPrngMt19937_64;
  std::vector<MeasurementRecord> records;

  /// Checks positions are strictly increasing and rows follow the schedule.
  void validate(const MeasurementSchedule& sched) const;
  /// Index of the record at `position`, or records.size() if absent.
  std::size_t find_position(std::uint64_t position) const;
};

/// Simulated single-pixel acquisition. Position p reads frame
/// p / measurements_per_frame at row sched.row_at(p), plus Gaussian noise.
MeasurementStream acquire(std::span<const DyadicImage> frames, const MeasurementSchedule& sched,
                          std::size_t measurements_per_frame, double noise_sigma,
                          std::uint64_t noise_seed);

/// Image-domain additive white Gaussian noise.
DyadicImage add_image_noise(const DyadicImage& img, double sigma, std::uint64_t seed);

// STO1 container. Little-endian throughout.
inline constexpr char kStreamMagic[4] = {'S', 'T', 'O', '1'};
inline constexpr std::uint32_t kStreamVersion = 1;
inline constexpr std::size_t kStreamHeaderBytes = 60;
inline constexpr std::size_t kStreamRecordBytes = 20;

std::vector<std::uint8_t> encode_stream(const MeasurementStream& stream);
MeasurementStream decode_stream(std::span<const std::uint8_t> bytes);

void write_stream(const MeasurementStream& stream, const std::filesystem::path& path);
/// Reads and validates the container, including schedule consistency.
MeasurementStream read_stream(const std::filesystem::path& path);

}  // namespace stone
