#include "stone/sampling.hpp"

#include "stone/error.hpp"
#include "stone/file_util.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <random>
#include <string>

namespace stone {

namespace {

// Uniform draw of one of the 24 permutations of {0,1,2,3}, by rejection on
// the raw 64-bit output so the mapping does not depend on the standard
// library's distribution implementation.
std::array<std::size_t, 4> draw_permutation4(std::mt19937_64& rng) {
  constexpr std::uint64_t kLimit = (~std::uint64_t{0} / 24) * 24;
  std::uint64_t x = rng();
  while (x >= kLimit) x = rng();
  std::uint64_t code = x % 24;
  std::array<std::size_t, 4> pool{0, 1, 2, 3};
  std::array<std::size_t, 4> perm{};
  std::size_t remaining = 4;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::uint64_t fact = (i == 0) ? 6 : (i == 1) ? 2 : 1;
    const std::size_t pick = (i < 3) ? static_cast<std::size_t>(code / fact) : 0;
    if (i < 3) code %= fact;
    perm[i] = pool[pick];
    std::copy(pool.begin() + static_cast<std::ptrdiff_t>(pick) + 1,
              pool.begin() + static_cast<std::ptrdiff_t>(remaining), pool.begin() + static_cast<std::ptrdiff_t>(pick));
    --remaining;
  }
  return perm;
}

// Orders the contiguous index range [lo, lo + len) into out[0, len).
void order_range(std::uint32_t lo, std::size_t len, std::mt19937_64& rng, std::uint32_t* out) {
  if (len == 1) {
    out[0] = lo;
    return;
  }
  const std::size_t quarter = len / 4;
  // perm[slot] = which contiguous quarter gets name K^{slot+1}
  const auto perm = draw_permutation4(rng);
  std::vector<std::uint32_t> sub(len);
  for (std::size_t slot = 0; slot < 4; ++slot) {
    order_range(lo + static_cast<std::uint32_t>(perm[slot] * quarter), quarter, rng,
                sub.data() + slot * quarter);
  }
  for (std::size_t i = 0; i < quarter; ++i)
    for (std::size_t slot = 0; slot < 4; ++slot) out[4 * i + slot] = sub[slot * quarter + i];
}

}  // namespace

MeasurementSchedule::MeasurementSchedule(std::size_t side, std::uint64_t seed,
                                         std::vector<std::uint32_t> order)
    : side_(side), seed_(seed), order_(std::move(order)) {
  if (!is_power_of_two(side)) fail(ErrorCode::InvalidDimension, "schedule side is not a power of two");
  if (order_.size() != side * side) fail(ErrorCode::InvalidDimension, "schedule length mismatch");
}

MeasurementSchedule build_schedule(std::size_t side, std::uint64_t seed) {
  if (!is_power_of_two(side)) {
    fail(ErrorCode::InvalidDimension,
         "schedule side " + std::to_string(side) + " is not a power of two");
  }
  if (side > (std::size_t{1} << 15)) fail(ErrorCode::ResourceLimit, "schedule side too large");
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> order(side * side);
  order_range(0, order.size(), rng, order.data());
  return MeasurementSchedule(side, seed, std::move(order));
}

RowSelector selector_from_window(const MeasurementSchedule& sched, std::uint64_t start,
                                 std::size_t count) {
  if (count > sched.length()) {
    fail(ErrorCode::InvalidWindow, "window of " + std::to_string(count) +
                                       " exceeds schedule length " +
                                       std::to_string(sched.length()));
  }
  RowSelector sel{sched.side(), {}};
  sel.rows.reserve(count);
  for (std::size_t j = 0; j < count; ++j) sel.rows.push_back(sched.row_at(start + j));
  return sel;
}

void MeasurementStream::validate(const MeasurementSchedule& sched) const {
  if (sched.side() != side) fail(ErrorCode::Format, "stream side does not match schedule");
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && records[i].position <= records[i - 1].position) {
      fail(ErrorCode::Format, "record positions are not strictly increasing at record " +
                                  std::to_string(i));
    }
    if (records[i].row_index != sched.row_at(records[i].position)) {
      fail(ErrorCode::Format, "row index of record " + std::to_string(i) +
                                  " does not follow the schedule");
    }
  }
}

std::size_t MeasurementStream::find_position(std::uint64_t position) const {
  auto it = std::lower_bound(records.begin(), records.end(), position,
                             [](const MeasurementRecord& r, std::uint64_t p) { return r.position < p; });
  if (it == records.end() || it->position != position) return records.size();
  return static_cast<std::size_t>(it - records.begin());
}

MeasurementStream acquire(std::span<const DyadicImage> frames, const MeasurementSchedule& sched,
                          std::size_t measurements_per_frame, double noise_sigma,
                          std::uint64_t noise_seed) {
  if (measurements_per_frame < 1) {
    fail(ErrorCode::InvalidArgument, "measurements_per_frame must be at least 1");
  }
  if (!(noise_sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
  const std::size_t side = sched.side();
  for (const auto& f : frames) {
    if (f.side() != side) {
      fail(ErrorCode::InvalidDimension, "frame side " + std::to_string(f.side()) +
                                            " does not match schedule side " +
                                            std::to_string(side));
    }
  }
  const PixelOrdering ord(side);
  std::vector<std::vector<double>> coeffs(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    coeffs[f].resize(side * side);
    vectorize_into(frames[f].pixels(), ord, coeffs[f]);
    stone_transform_inplace(coeffs[f]);
  }

  MeasurementStream stream;
  stream.side = side;
  stream.measurements_per_frame = static_cast<std::uint32_t>(measurements_per_frame);
  stream.frame_count = static_cast<std::uint32_t>(frames.size());
  stream.schedule_seed = sched.seed();
  stream.noise_sigma = noise_sigma;
  stream.noise_seed = noise_seed;

  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  const std::uint64_t total = std::uint64_t{frames.size()} * measurements_per_frame;
  stream.records.reserve(static_cast<std::size_t>(total));
  for (std::uint64_t p = 0; p < total; ++p) {
    const auto frame = static_cast<std::size_t>(p / measurements_per_frame);
    const std::uint32_t row = sched.row_at(p);
    double value = coeffs[frame][row];
    if (noise_sigma > 0.0) value += noise(rng);
    stream.records.push_back({p, row, value});
  }
  return stream;
}

DyadicImage add_image_noise(const DyadicImage& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
  DyadicImage out = img;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.pixels()) v += noise(rng);
  return out;
}

std::vector<std::uint8_t> encode_stream(const MeasurementStream& s) {
  std::vector<std::uint8_t> out;
  out.reserve(kStreamHeaderBytes + s.records.size() * kStreamRecordBytes);
  out.insert(out.end(), kStreamMagic, kStreamMagic + 4);
  put_u32(out, kStreamVersion);
  put_u32(out, static_cast<std::uint32_t>(s.side));
  put_u32(out, s.measurements_per_frame);
  put_u32(out, s.frame_count);
  put_u64(out, s.schedule_seed);
  put_u64(out, s.records.size());
  put_f64(out, s.noise_sigma);
  put_u64(out, s.noise_seed);
  // Reserved: generator id, then four zero bytes.
  put_u32(out, s.prng_id);
  put_u32(out, 0);
  for (const auto& r : s.records) {
    put_u64(out, r.position);
    put_u32(out, r.row_index);
    put_f64(out, r.value);
  }
  return out;
}

MeasurementStream decode_stream(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kStreamHeaderBytes) fail(ErrorCode::Format, "stream file truncated header");
  if (std::memcmp(bytes.data(), kStreamMagic, 4) != 0) fail(ErrorCode::Format, "bad stream magic");
  const std::uint8_t* p = bytes.data() + 4;
  const std::uint32_t version = get_u32(p);
  if (version != kStreamVersion) {
    fail(ErrorCode::Format, "unsupported stream version " + std::to_string(version));
  }
  MeasurementStream s;
  s.side = get_u32(p + 4);
  s.measurements_per_frame = get_u32(p + 8);
  s.frame_count = get_u32(p + 12);
  s.schedule_seed = get_u64(p + 16);
  const std::uint64_t count = get_u64(p + 24);
  s.noise_sigma = get_f64(p + 32);
  s.noise_seed = get_u64(p + 40);
  s.prng_id = get_u32(p + 48);
  if (s.prng_id == 0) s.prng_id = kPrngMt19937_64;
  if (!is_power_of_two(s.side)) fail(ErrorCode::Format, "stream side is not a power of two");
  if ((bytes.size() - kStreamHeaderBytes) / kStreamRecordBytes < count ||
      bytes.size() != kStreamHeaderBytes + count * kStreamRecordBytes) {
    fail(ErrorCode::Format, "stream record count does not match file size");
  }
  s.records.resize(static_cast<std::size_t>(count));
  const std::uint8_t* r = bytes.data() + kStreamHeaderBytes;
  for (auto& rec : s.records) {
    rec.position = get_u64(r);
    rec.row_index = get_u32(r + 8);
    rec.value = get_f64(r + 12);
    r += kStreamRecordBytes;
  }
  return s;
}

void write_stream(const MeasurementStream& stream, const std::filesystem::path& path) {
  write_file_atomic(path, encode_stream(stream));
}

MeasurementStream read_stream(const std::filesystem::path& path) {
  MeasurementStream s = decode_stream(read_file_bytes(path));
  if (s.prng_id != kPrngMt19937_64) {
    fail(ErrorCode::Format, "unknown generator id " + std::to_string(s.prng_id));
  }
  s.validate(build_schedule(s.side, s.schedule_seed));
  return s;
}

}  // namespace stone
