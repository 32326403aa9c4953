#pragma once

#include "stone/embedding.hpp"
#include "stone/preview.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stone {

/// Cyclic translation: out[r][c] = img[(r - dy) mod n][(c - dx) mod n].
DyadicImage shift_cyclic(const DyadicImage& img, long dx, long dy);

/// Named full-resolution templates with block-mean previews cached at every
/// dyadic side up to N. Names are kept in sorted order.
class HypothesisCatalog {
public:
  struct Entry {
    std::string name;
    DyadicImage image;
    std::map<std::size_t, DyadicImage> previews;
  };

  HypothesisCatalog() = default;

  void add(std::string name, DyadicImage image);
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t side() const noexcept { return side_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const DyadicImage& preview(std::size_t index, std::size_t n) const;

private:
  std::size_t side_ = 0;
  std::vector<Entry> entries_;
};

struct MatchResult {
  std::string best_template;
  long dx = 0;
  long dy = 0;
  double score = 0.0;
  /// Per template, n*n squared-error scores indexed [dy * n + dx].
  std::map<std::string, std::vector<double>> surfaces;
};

/// Squared-error score of every cyclic shift, via FFT cross-correlation.
std::vector<double> score_surface(const DyadicImage& scene, const DyadicImage& templ);

MatchResult smashed_match(const PreviewImage& scene_preview, const HypothesisCatalog& catalog,
                          bool keep_surfaces = false);

struct ScorePair {
  double preview_domain;
  double compressive_domain;
};

/// Scores a shifted template against a one-sample-per-group window two ways:
/// in the preview domain and against the re-binned coefficients.
ScorePair compressive_score_equivalence(std::span<const WindowSample> window,
                                        const DyadicImage& templ, long dx, long dy);

}  // namespace stone
