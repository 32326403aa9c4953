#include "stone/image_io.hpp"

#include "stone/error.hpp"
#include "stone/file_util.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>

namespace stone {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path sidecar_of(const fs::path& path) {
  fs::path s = path;
  s += ".json";
  return s;
}

std::size_t read_sidecar_side(const fs::path& path, const char* expected_kind) {
  const auto bytes = read_file_bytes(sidecar_of(path));
  json meta;
  try {
    meta = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, "bad sidecar for " + path.string() + ": " + e.what());
  }
  if (!meta.contains("side") || !meta["side"].is_number_unsigned()) {
    fail(ErrorCode::Format, "sidecar for " + path.string() + " lacks an unsigned \"side\"");
  }
  if (expected_kind && meta.contains("kind") && meta["kind"] != expected_kind) {
    fail(ErrorCode::Format, "sidecar kind mismatch for " + path.string());
  }
  return meta["side"].get<std::size_t>();
}

// Skips whitespace and '#' comments in a PGM header.
std::size_t pgm_token(const std::vector<std::uint8_t>& b, std::size_t& pos) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t v = 0;
  bool any = false;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos] - '0');
    ++pos;
    any = true;
  }
  if (!any) fail(ErrorCode::Format, "malformed PGM header");
  return v;
}

bool is_image_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".pgm" || ext == ".f32";
}

}  // namespace

ImageFormat format_from_path(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return ImageFormat::Pgm8;
  if (ext == ".f32") return ImageFormat::RawF32;
  fail(ErrorCode::InvalidArgument, "unrecognised image extension '" + ext + "' (use .pgm or .f32)");
}

DyadicImage read_pgm(const fs::path& path) {
  const auto b = read_file_bytes(path);
  if (b.size() < 2 || b[0] != 'P' || b[1] != '5') fail(ErrorCode::Format, path.string() + " is not a binary PGM");
  std::size_t pos = 2;
  const std::size_t width = pgm_token(b, pos);
  const std::size_t height = pgm_token(b, pos);
  const std::size_t maxval = pgm_token(b, pos);
  ++pos;  // single whitespace before raster
  if (width != height) fail(ErrorCode::InvalidDimension, "image " + path.string() + " is not square");
  if (maxval == 0 || maxval > 65535) fail(ErrorCode::Format, "bad PGM maxval");
  const std::size_t bpp = maxval < 256 ? 1 : 2;
  if (b.size() < pos + width * height * bpp) fail(ErrorCode::Format, "PGM raster truncated");
  std::vector<double> px(width * height);
  for (std::size_t k = 0; k < px.size(); ++k) {
    const std::size_t v = bpp == 1 ? b[pos + k] : (std::size_t{b[pos + 2 * k]} << 8) | b[pos + 2 * k + 1];
    px[k] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return DyadicImage(width, std::move(px));
}

void write_pgm(const DyadicImage& img, const fs::path& path, int bits) {
  if (bits != 8 && bits != 16) fail(ErrorCode::InvalidArgument, "PGM depth must be 8 or 16");
  const std::size_t maxval = bits == 8 ? 255 : 65535;
  const std::string header = "P5\n" + std::to_string(img.side()) + " " + std::to_string(img.side()) +
                             "\n" + std::to_string(maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double v : img.pixels()) {
    const auto q = static_cast<std::size_t>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
    if (bits == 16) out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  write_file_atomic(path, out);
}

DyadicImage read_raw_f32(const fs::path& path) {
  const std::size_t side = read_sidecar_side(path, nullptr);
  const auto b = read_file_bytes(path);
  if (b.size() != side * side * 4) fail(ErrorCode::Format, "raw image size does not match sidecar");
  std::vector<double> px(side * side);
  for (std::size_t k = 0; k < px.size(); ++k) px[k] = get_f32(b.data() + 4 * k);
  return DyadicImage(side, std::move(px));
}

void write_raw_f32(const DyadicImage& img, const fs::path& path) {
  std::vector<std::uint8_t> out;
  out.reserve(img.pixel_count() * 4);
  for (double v : img.pixels()) put_f32(out, static_cast<float>(v));
  write_file_atomic(sidecar_of(path), json{{"side", img.side()}}.dump() + "\n");
  write_file_atomic(path, out);
}

DyadicImage read_image(const fs::path& path) {
  switch (format_from_path(path)) {
    case ImageFormat::RawF32: return read_raw_f32(path);
    default: return read_pgm(path);
  }
}

void write_image(const DyadicImage& img, const fs::path& path, ImageFormat format) {
  switch (format) {
    case ImageFormat::Pgm8: write_pgm(img, path, 8); break;
    case ImageFormat::Pgm16: write_pgm(img, path, 16); break;
    case ImageFormat::RawF32: write_raw_f32(img, path); break;
  }
}

void write_coefficients(const std::vector<double>& coef, std::size_t side, const fs::path& path) {
  if (coef.size() != side * side) fail(ErrorCode::InvalidDimension, "coefficient count does not match side");
  std::vector<std::uint8_t> out;
  out.reserve(coef.size() * 8);
  for (double v : coef) put_f64(out, v);
  write_file_atomic(sidecar_of(path),
                    json{{"side", side}, {"kind", "stone-coefficients"}}.dump() + "\n");
  write_file_atomic(path, out);
}

std::pair<std::vector<double>, std::size_t> read_coefficients(const fs::path& path) {
  const std::size_t side = read_sidecar_side(path, "stone-coefficients");
  const auto b = read_file_bytes(path);
  if (b.size() != side * side * 8) fail(ErrorCode::Format, "coefficient file size does not match sidecar");
  std::vector<double> coef(side * side);
  for (std::size_t k = 0; k < coef.size(); ++k) coef[k] = get_f64(b.data() + 8 * k);
  return {std::move(coef), side};
}

std::vector<DyadicImage> read_frame_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::Io, dir.string() + " is not a directory");
  std::vector<std::pair<unsigned long long, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
    const std::string stem = entry.path().stem().string();
    // Accept "00012" as well as "frame_00012".
    auto digits_at = stem.find_last_not_of("0123456789");
    const std::string digits = digits_at == std::string::npos ? stem : stem.substr(digits_at + 1);
    if (digits.empty()) fail(ErrorCode::Format, "frame file " + entry.path().string() + " has no numeric name");
    files.emplace_back(std::stoull(digits), entry.path());
  }
  if (files.empty()) fail(ErrorCode::Io, "no frames found in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<DyadicImage> frames;
  for (const auto& [_, path] : files) {
    frames.push_back(read_image(path));
    if (frames.back().side() != frames.front().side()) {
      fail(ErrorCode::InvalidDimension, "frame " + path.string() + " differs in size from the first frame");
    }
  }
  return frames;
}

void write_frame_directory(const std::vector<DyadicImage>& frames, const fs::path& dir,
                           ImageFormat format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir.string());
  const char* ext = format == ImageFormat::RawF32 ? ".f32" : ".pgm";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu%s", f, ext);
    write_image(frames[f], dir / name, format);
  }
}

std::vector<std::pair<std::string, DyadicImage>> read_named_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::Io, dir.string() + " is not a directory");
  std::vector<std::pair<std::string, DyadicImage>> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
    out.emplace_back(entry.path().stem().string(), read_image(entry.path()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace stone
