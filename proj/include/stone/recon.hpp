#pragma once

#include "stone/embedding.hpp"
#include "stone/preview.hpp"
#include "stone/sampling.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace stone {

/// F stacked frames of side N, each row-major.
class VideoVolume {
public:
  VideoVolume(std::size_t side, std::size_t frames, double fill = 0.0);
  static VideoVolume from_frames(std::span<const DyadicImage> frames);

  std::size_t side() const noexcept { return side_; }
  std::size_t frames() const noexcept { return frames_; }
  std::size_t frame_size() const noexcept { return side_ * side_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& at(std::size_t f, std::size_t row, std::size_t col) {
    return data_[f * frame_size() + row * side_ + col];
  }
  double at(std::size_t f, std::size_t row, std::size_t col) const {
    return data_[f * frame_size() + row * side_ + col];
  }

  std::span<double> frame(std::size_t f) { return {data_.data() + f * frame_size(), frame_size()}; }
  std::span<const double> frame(std::size_t f) const {
    return {data_.data() + f * frame_size(), frame_size()};
  }
  DyadicImage frame_image(std::size_t f) const;
  std::vector<DyadicImage> to_frames() const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

private:
  std::size_t side_;
  std::size_t frames_;
  std::vector<double> data_;
};

/// Dual variable of the 3-D TV term: spatial pair per pixel per frame and one
/// temporal component per pixel per frame interface (F - 1 of them).
struct DualField {
  std::size_t side = 0;
  std::size_t frames = 0;
  std::vector<double> px;
  std::vector<double> py;
  std::vector<double> pt;

  DualField() = default;
  DualField(std::size_t side, std::size_t frames);
  std::size_t size() const noexcept { return px.size() + py.size() + pt.size(); }
};

/// Forward differences with zero at the far boundary. px differences rows
/// (i+1 vs i), py differences columns, pt differences consecutive frames.
DualField grad3(const VideoVolume& u);
/// Exact Euclidean adjoint of grad3 (a negative divergence).
VideoVolume grad3_adjoint(const DualField& p);

/// Isotropic spatial TV plus anisotropic temporal TV.
double tv3_value(const VideoVolume& u);

enum class DualProjection {
  Isotropic,  // (px,py) onto the unit disc, pt clamped to [-1, 1]
  Linf,       // every component clamped to [-1, 1]
};

DualField project_dual(DualField p, DualProjection mode = DualProjection::Isotropic);

/// Per-frame measurements merged by row: counts[k] is the multiplicity of row
/// k, sums[k] the sum of its values.
struct FrameData {
  std::vector<double> counts;
  std::vector<double> sums;
  double sum_squares = 0.0;
  std::size_t samples = 0;
};

struct FrameMeasurements {
  std::size_t side = 0;
  std::vector<FrameData> frames;

  FrameMeasurements() = default;
  FrameMeasurements(std::size_t side, std::size_t frame_count);

  void add(std::size_t frame, std::uint32_t row, double value);
  std::size_t frame_count() const noexcept { return frames.size(); }
  /// (mu/2) * sum over samples of ((S u_f)[row] - value)^2
  double data_term(const VideoVolume& u, double mu) const;
};

/// Splits a stream into frames of `width` consecutive records, starting every
/// `stride` records (stride == width gives disjoint windows). Only complete
/// windows become frames.
FrameMeasurements segment_stream(const MeasurementStream& stream, std::size_t width,
                                 std::size_t stride);

/// argmin_u (mu/2)||R S u - b||^2 + (1/(2 tau))||u - u_hat||^2, frame by frame,
/// using two fast transforms per frame.
VideoVolume data_prox(const VideoVolume& u_hat, const FrameMeasurements& meas, double mu,
                      double tau);

/// Operator-norm bound on grad3^T grad3.
inline constexpr double kGradNormBound = 12.0;

enum class InitMode { Preview, Zero };

struct SolverConfig {
  double mu = 500.0;
  double tau = 1.0 / std::sqrt(kGradNormBound);
  double sigma = 1.0 / std::sqrt(kGradNormBound);
  std::size_t max_iters = 2000;
  double tol = 1e-4;
  bool adaptive = false;
  DualProjection projection = DualProjection::Isotropic;
  InitMode init = InitMode::Preview;
  // Residual balancing, used only when adaptive is set.
  double adapt_ratio = 2.0;
  double adapt_alpha = 0.5;
  double adapt_decay = 0.95;

  void validate() const;
};

struct TraceEntry {
  std::size_t iteration;
  double objective;
  double primal_residual;
  double dual_residual;
  double elapsed_seconds;
};

struct SolveResult {
  VideoVolume volume;
  std::vector<TraceEntry> trace;
  std::size_t iterations = 0;
  bool converged = false;
  double final_tau = 0.0;
  double final_sigma = 0.0;
};

/// Objective minimized by solve_3dtv: tv3_value(u) + data term.
double objective_3dtv(const VideoVolume& u, const FrameMeasurements& meas, double mu);

/// Per-frame starting point: the finest complete preview of each frame's
/// samples, upsampled to full resolution; zero for frames without samples.
VideoVolume preview_initialization(const FrameMeasurements& meas);

SolveResult solve_3dtv(const FrameMeasurements& meas, const SolverConfig& config,
                       const std::optional<VideoVolume>& init = std::nullopt);

DyadicImage solve_single_frame(const FrameMeasurements& meas, const SolverConfig& config);

std::string trace_to_csv(std::span<const TraceEntry> trace);

}  // namespace stone
