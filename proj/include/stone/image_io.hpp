#pragma once

#include "stone/embedding.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace stone {

enum class ImageFormat {
  Pgm8,
  Pgm16,
  RawF32,  // little-endian float32 + "<file>.json" sidecar {"side": N}
};

/// Chooses from the extension: ".pgm" -> Pgm8, ".f32" -> RawF32.
ImageFormat format_from_path(const std::filesystem::path& path);

/// Binary PGM (P5), 8 or 16 bit. Intensities are scaled to [0, 1] by maxval.
DyadicImage read_pgm(const std::filesystem::path& path);
/// Values are clamped to [0, 1] before quantisation.
void write_pgm(const DyadicImage& img, const std::filesystem::path& path, int bits = 8);

DyadicImage read_raw_f32(const std::filesystem::path& path);
void write_raw_f32(const DyadicImage& img, const std::filesystem::path& path);

DyadicImage read_image(const std::filesystem::path& path);
void write_image(const DyadicImage& img, const std::filesystem::path& path, ImageFormat format);

/// Transform coefficients: little-endian float64 in nested-dissection order,
/// with a "<file>.json" sidecar {"side": N, "kind": "stone-coefficients"}.
void write_coefficients(const std::vector<double>& coef, std::size_t side,
                        const std::filesystem::path& path);
std::pair<std::vector<double>, std::size_t> read_coefficients(const std::filesystem::path& path);

/// Frames from a directory of numerically named .pgm / .f32 files, in
/// numeric order of their stems.
std::vector<DyadicImage> read_frame_directory(const std::filesystem::path& dir);
/// Writes frame_00000.<ext>, frame_00001.<ext>, ...
void write_frame_directory(const std::vector<DyadicImage>& frames, const std::filesystem::path& dir,
                           ImageFormat format);

/// (name, image) pairs from every .pgm / .f32 file in `dir`; name is the stem.
std::vector<std::pair<std::string, DyadicImage>> read_named_images(const std::filesystem::path& dir);

}  // namespace stone
