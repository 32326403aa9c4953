#include "stone/smashed.hpp"

#include "stone/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>

namespace stone {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// 2-D complex DFT of a real n x n image (forward) or of a spectrum (backward).
class Fft2 {
public:
  explicit Fft2(std::size_t n) : n_(n) {
    const int ni = static_cast<int>(n);
    buf_ = fftw_alloc_complex(n * n);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_2d(ni, ni, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(ni, ni, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft2() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buf_);
  }
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  std::vector<std::complex<double>> forward(std::span<const double> real) {
    for (std::size_t k = 0; k < n_ * n_; ++k) {
      buf_[k][0] = real[k];
      buf_[k][1] = 0.0;
    }
    fftw_execute(forward_);
    std::vector<std::complex<double>> out(n_ * n_);
    for (std::size_t k = 0; k < n_ * n_; ++k) out[k] = {buf_[k][0], buf_[k][1]};
    return out;
  }

  /// Unnormalised inverse; returns the real part.
  std::vector<double> backward_real(std::span<const std::complex<double>> spec) {
    for (std::size_t k = 0; k < n_ * n_; ++k) {
      buf_[k][0] = spec[k].real();
      buf_[k][1] = spec[k].imag();
    }
    fftw_execute(backward_);
    std::vector<double> out(n_ * n_);
    for (std::size_t k = 0; k < n_ * n_; ++k) out[k] = buf_[k][0];
    return out;
  }

private:
  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

double sum_squares(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double direct_score(const DyadicImage& scene, const DyadicImage& templ, long dx, long dy) {
  const DyadicImage shifted = shift_cyclic(templ, dx, dy);
  double acc = 0.0;
  for (std::size_t k = 0; k < scene.pixel_count(); ++k) {
    const double d = scene.pixels()[k] - shifted.pixels()[k];
    acc += d * d;
  }
  return acc;
}

}  // namespace

DyadicImage shift_cyclic(const DyadicImage& img, long dx, long dy) {
  const long n = static_cast<long>(img.side());
  DyadicImage out(img.side());
  for (long r = 0; r < n; ++r) {
    const long sr = ((r - dy) % n + n) % n;
    for (long c = 0; c < n; ++c) {
      const long sc = ((c - dx) % n + n) % n;
      out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          img.at(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
    }
  }
  return out;
}

void HypothesisCatalog::add(std::string name, DyadicImage image) {
  if (!entries_.empty() && image.side() != side_) {
    fail(ErrorCode::InvalidDimension, "template '" + name + "' has side " +
                                          std::to_string(image.side()) + ", catalog uses " +
                                          std::to_string(side_));
  }
  for (const auto& e : entries_)
    if (e.name == name) fail(ErrorCode::InvalidArgument, "duplicate template name '" + name + "'");
  side_ = image.side();
  Entry entry{std::move(name), std::move(image), {}};
  for (std::size_t n = side_; n >= 1; n /= 2) entry.previews.emplace(n, downsample_mean(entry.image, n));
  auto pos = std::lower_bound(entries_.begin(), entries_.end(), entry.name,
                              [](const Entry& e, const std::string& s) { return e.name < s; });
  entries_.insert(pos, std::move(entry));
}

const DyadicImage& HypothesisCatalog::preview(std::size_t index, std::size_t n) const {
  const auto& previews = entries_.at(index).previews;
  auto it = previews.find(n);
  if (it == previews.end()) {
    fail(ErrorCode::InvalidDimension, "no template preview at side " + std::to_string(n));
  }
  return it->second;
}

std::vector<double> score_surface(const DyadicImage& scene, const DyadicImage& templ) {
  if (scene.side() != templ.side()) fail(ErrorCode::InvalidDimension, "scene/template side mismatch");
  const std::size_t n = scene.side();
  Fft2 fft(n);
  const auto s_hat = fft.forward(scene.pixels());
  auto t_hat = fft.forward(templ.pixels());
  for (std::size_t k = 0; k < t_hat.size(); ++k) t_hat[k] = s_hat[k] * std::conj(t_hat[k]);
  // corr[dy*n+dx] = sum_{r,c} s[r][c] * t[r-dy][c-dx]
  const auto corr = fft.backward_real(t_hat);
  const double ss = sum_squares(scene.pixels());
  const double tt = sum_squares(templ.pixels());
  const double norm = 1.0 / static_cast<double>(n * n);
  std::vector<double> out(n * n);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(0.0, ss - 2.0 * corr[k] * norm + tt);
  return out;
}

MatchResult smashed_match(const PreviewImage& scene_preview, const HypothesisCatalog& catalog,
                          bool keep_surfaces) {
  if (catalog.empty()) fail(ErrorCode::InvalidArgument, "hypothesis catalog is empty");
  const DyadicImage& scene = scene_preview.image;
  const std::size_t n = scene.side();
  if (scene_preview.source_side != 0 && scene_preview.source_side != catalog.side()) {
    fail(ErrorCode::InvalidDimension, "scene source side " +
                                          std::to_string(scene_preview.source_side) +
                                          " does not match catalog side " +
                                          std::to_string(catalog.side()));
  }
  MatchResult best;
  bool have = false;
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    const DyadicImage& templ = catalog.preview(t, n);
    auto surface = score_surface(scene, templ);
    // Entries are name-sorted and the scan runs dx-major, so strict
    // comparison keeps the first minimum in (name, dx, dy) order.
    for (std::size_t dx = 0; dx < n; ++dx) {
      for (std::size_t dy = 0; dy < n; ++dy) {
        const double s = surface[dy * n + dx];
        if (!have || s < best.score) {
          best.best_template = catalog.entries()[t].name;
          best.dx = static_cast<long>(dx);
          best.dy = static_cast<long>(dy);
          best.score = s;
          have = true;
        }
      }
    }
    if (keep_surfaces) best.surfaces.emplace(catalog.entries()[t].name, std::move(surface));
  }
  // Report the winning score from a direct evaluation rather than the FFT path.
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    if (catalog.entries()[t].name == best.best_template) {
      best.score = direct_score(scene, catalog.preview(t, n), best.dx, best.dy);
    }
  }
  return best;
}

ScorePair compressive_score_equivalence(std::span<const WindowSample> window,
                                        const DyadicImage& templ, long dx, long dy) {
  const std::size_t fine = templ.side();
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(window.size()))));
  if (n * n != window.size() || !is_power_of_two(n) || n > fine) {
    fail(ErrorCode::InvalidDimension, "window length must be n^2 for a dyadic n <= template side");
  }
  RebinnedCoefficients rb = rebin_partial(window, fine, n);
  for (auto c : rb.counts) {
    if (c != 1) fail(ErrorCode::NotApplicable, "window must hold exactly one sample per group");
  }
  const PixelOrdering ord(n);
  const PreviewImage scene = preview(rb, ord);
  const DyadicImage shifted = shift_cyclic(downsample_mean(templ, n), dx, dy);

  double preview_score = 0.0;
  for (std::size_t k = 0; k < shifted.pixel_count(); ++k) {
    const double d = scene.image.pixels()[k] - shifted.pixels()[k];
    preview_score += d * d;
  }
  std::vector<double> templ_coef(n * n);
  vectorize_into(shifted.pixels(), ord, templ_coef);
  stone_transform_inplace(templ_coef);
  double comp_score = 0.0;
  for (std::size_t k = 0; k < templ_coef.size(); ++k) {
    const double d = rb.values[k] - templ_coef[k];
    comp_score += d * d;
  }
  return {preview_score, comp_score};
}

}  // namespace stone
