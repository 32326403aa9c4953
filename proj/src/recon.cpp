#include "stone/recon.hpp"

#include "stone/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>

namespace stone {

VideoVolume::VideoVolume(std::size_t side, std::size_t frames, double fill)
    : side_(side), frames_(frames) {
  if (!is_power_of_two(side)) fail(ErrorCode::InvalidDimension, "volume side is not a power of two");
  if (frames < 1) fail(ErrorCode::InvalidDimension, "volume needs at least one frame");
  data_.assign(side * side * frames, fill);
}

VideoVolume VideoVolume::from_frames(std::span<const DyadicImage> frames) {
  if (frames.empty()) fail(ErrorCode::InvalidDimension, "no frames");
  VideoVolume v(frames[0].side(), frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (frames[f].side() != v.side()) fail(ErrorCode::InvalidDimension, "frames differ in side");
    std::copy(frames[f].pixels().begin(), frames[f].pixels().end(), v.frame(f).begin());
  }
  return v;
}

DyadicImage VideoVolume::frame_image(std::size_t f) const {
  auto src = frame(f);
  return DyadicImage(side_, std::vector<double>(src.begin(), src.end()));
}

std::vector<DyadicImage> VideoVolume::to_frames() const {
  std::vector<DyadicImage> out;
  out.reserve(frames_);
  for (std::size_t f = 0; f < frames_; ++f) out.push_back(frame_image(f));
  return out;
}

DualField::DualField(std::size_t side_, std::size_t frames_)
    : side(side_), frames(frames_), px(side_ * side_ * frames_, 0.0),
      py(side_ * side_ * frames_, 0.0),
      pt(frames_ > 0 ? side_ * side_ * (frames_ - 1) : 0, 0.0) {}

namespace {

// Gradient into preallocated buffers.
void grad3_into(std::span<const double> u, std::size_t n, std::size_t frames, DualField& g) {
  const std::size_t fs = n * n;
  for (std::size_t f = 0; f < frames; ++f) {
    const double* uf = u.data() + f * fs;
    double* gx = g.px.data() + f * fs;
    double* gy = g.py.data() + f * fs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = i * n + j;
        gx[k] = (i + 1 < n) ? uf[k + n] - uf[k] : 0.0;
        gy[k] = (j + 1 < n) ? uf[k + 1] - uf[k] : 0.0;
      }
    }
    if (f + 1 < frames) {
      double* gt = g.pt.data() + f * fs;
      const double* un = uf + fs;
      for (std::size_t k = 0; k < fs; ++k) gt[k] = un[k] - uf[k];
    }
  }
}

void grad3_adjoint_into(const DualField& p, std::span<double> out) {
  const std::size_t n = p.side;
  const std::size_t fs = n * n;
  for (std::size_t f = 0; f < p.frames; ++f) {
    const double* px = p.px.data() + f * fs;
    const double* py = p.py.data() + f * fs;
    double* o = out.data() + f * fs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = i * n + j;
        double v = 0.0;
        if (i + 1 < n) v -= px[k];
        if (i > 0) v += px[k - n];
        if (j + 1 < n) v -= py[k];
        if (j > 0) v += py[k - 1];
        o[k] = v;
      }
    }
    if (f + 1 < p.frames) {
      const double* pt = p.pt.data() + f * fs;
      for (std::size_t k = 0; k < fs; ++k) o[k] -= pt[k];
    }
    if (f > 0) {
      const double* pt = p.pt.data() + (f - 1) * fs;
      for (std::size_t k = 0; k < fs; ++k) o[k] += pt[k];
    }
  }
}

void project_dual_inplace(DualField& p, DualProjection mode) {
  if (mode == DualProjection::Isotropic) {
    for (std::size_t k = 0; k < p.px.size(); ++k) {
      const double norm = std::sqrt(p.px[k] * p.px[k] + p.py[k] * p.py[k]);
      if (norm > 1.0) {
        p.px[k] /= norm;
        p.py[k] /= norm;
        // Rounding can leave the pair a hair outside the disc.
        while (std::sqrt(p.px[k] * p.px[k] + p.py[k] * p.py[k]) > 1.0) {
          p.px[k] *= 1.0 - 0x1p-52;
          p.py[k] *= 1.0 - 0x1p-52;
        }
      }
    }
  } else {
    for (double& v : p.px) v = std::clamp(v, -1.0, 1.0);
    for (double& v : p.py) v = std::clamp(v, -1.0, 1.0);
  }
  for (double& v : p.pt) v = std::clamp(v, -1.0, 1.0);
}

void check_match(const VideoVolume& u, const FrameMeasurements& meas) {
  if (meas.side != u.side() || meas.frame_count() != u.frames()) {
    fail(ErrorCode::InvalidDimension, "measurements do not match volume dimensions");
  }
}

// Data prox for one frame. Leaves the solution's transform coefficients in
// `coef` and the solution pixels in `out`.
void data_prox_frame(std::span<const double> u_hat, const FrameData& fd, const PixelOrdering& ord,
                     double mu, double tau, std::span<double> coef, std::span<double> out) {
  if (fd.samples == 0) {
    std::copy(u_hat.begin(), u_hat.end(), out.begin());
    vectorize_into(u_hat, ord, coef);
    stone_transform_inplace(coef);
    return;
  }
  const double inv_tau = 1.0 / tau;
  vectorize_into(u_hat, ord, coef);
  stone_transform_inplace(coef);
  for (std::size_t k = 0; k < coef.size(); ++k) {
    coef[k] = (coef[k] * inv_tau + mu * fd.sums[k]) / (mu * fd.counts[k] + inv_tau);
  }
  std::vector<double> tmp(coef.begin(), coef.end());
  stone_transform_inplace(tmp);
  devectorize_into(tmp, ord, out);
}

double frame_data_term(std::span<const double> coef, const FrameData& fd) {
  double acc = fd.sum_squares;
  for (std::size_t k = 0; k < coef.size(); ++k) {
    if (fd.counts[k] != 0.0) acc += fd.counts[k] * coef[k] * coef[k] - 2.0 * coef[k] * fd.sums[k];
  }
  return std::max(acc, 0.0);
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

DualField grad3(const VideoVolume& u) {
  DualField g(u.side(), u.frames());
  grad3_into(u.data(), u.side(), u.frames(), g);
  return g;
}

VideoVolume grad3_adjoint(const DualField& p) {
  if (p.px.size() != p.side * p.side * p.frames || p.py.size() != p.px.size() ||
      p.pt.size() != p.side * p.side * (p.frames - 1)) {
    fail(ErrorCode::InvalidDimension, "dual field components have inconsistent sizes");
  }
  VideoVolume out(p.side, p.frames);
  grad3_adjoint_into(p, out.data());
  return out;
}

double tv3_value(const VideoVolume& u) {
  const DualField g = grad3(u);
  double acc = 0.0;
  for (std::size_t k = 0; k < g.px.size(); ++k) acc += std::sqrt(g.px[k] * g.px[k] + g.py[k] * g.py[k]);
  for (double v : g.pt) acc += std::abs(v);
  return acc;
}

DualField project_dual(DualField p, DualProjection mode) {
  project_dual_inplace(p, mode);
  return p;
}

FrameMeasurements::FrameMeasurements(std::size_t side_, std::size_t frame_count)
    : side(side_), frames(frame_count) {
  if (!is_power_of_two(side_)) fail(ErrorCode::InvalidDimension, "measurement side is not a power of two");
  for (auto& fd : frames) {
    fd.counts.assign(side_ * side_, 0.0);
    fd.sums.assign(side_ * side_, 0.0);
  }
}

void FrameMeasurements::add(std::size_t frame, std::uint32_t row, double value) {
  if (frame >= frames.size()) fail(ErrorCode::InvalidDimension, "frame index out of range");
  if (row >= side * side) fail(ErrorCode::InvalidDimension, "row index out of range");
  auto& fd = frames[frame];
  fd.counts[row] += 1.0;
  fd.sums[row] += value;
  fd.sum_squares += value * value;
  ++fd.samples;
}

double FrameMeasurements::data_term(const VideoVolume& u, double mu) const {
  check_match(u, *this);
  const PixelOrdering ord(side);
  std::vector<double> coef(side * side);
  double acc = 0.0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    vectorize_into(u.frame(f), ord, coef);
    stone_transform_inplace(coef);
    acc += frame_data_term(coef, frames[f]);
  }
  return 0.5 * mu * acc;
}

FrameMeasurements segment_stream(const MeasurementStream& stream, std::size_t width,
                                 std::size_t stride) {
  if (width < 1) fail(ErrorCode::InvalidArgument, "frame window width must be at least 1");
  if (stride < 1 || stride > width) {
    fail(ErrorCode::InvalidArgument, "window stride must be in [1, width]");
  }
  const std::size_t count = stream.records.size();
  const std::size_t frames = count < width ? 0 : (count - width) / stride + 1;
  if (frames == 0) {
    fail(ErrorCode::InvalidWindow, "stream has fewer records than one frame window");
  }
  FrameMeasurements meas(stream.side, frames);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = f * stride; i < f * stride + width; ++i) {
      meas.add(f, stream.records[i].row_index, stream.records[i].value);
    }
  }
  return meas;
}

VideoVolume data_prox(const VideoVolume& u_hat, const FrameMeasurements& meas, double mu,
                      double tau) {
  check_match(u_hat, meas);
  if (!(mu > 0.0) || !(tau > 0.0)) fail(ErrorCode::InvalidArgument, "mu and tau must be positive");
  const PixelOrdering ord(u_hat.side());
  VideoVolume out(u_hat.side(), u_hat.frames());
  std::vector<double> coef(u_hat.frame_size());
  for (std::size_t f = 0; f < u_hat.frames(); ++f) {
    data_prox_frame(u_hat.frame(f), meas.frames[f], ord, mu, tau, coef, out.frame(f));
  }
  return out;
}

void SolverConfig::validate() const {
  if (!(mu > 0.0)) fail(ErrorCode::InvalidArgument, "mu must be positive");
  if (!(tau > 0.0) || !(sigma > 0.0)) fail(ErrorCode::InvalidArgument, "tau and sigma must be positive");
  if (tau * sigma * kGradNormBound > 1.0 + 1e-12) {
    fail(ErrorCode::InvalidArgument, "step sizes violate tau*sigma*12 <= 1");
  }
  if (!(tol >= 0.0)) fail(ErrorCode::InvalidArgument, "tol must be non-negative");
  if (adaptive && (!(adapt_ratio > 1.0) || !(adapt_alpha > 0.0 && adapt_alpha < 1.0) ||
                   !(adapt_decay > 0.0 && adapt_decay <= 1.0))) {
    fail(ErrorCode::InvalidArgument, "invalid adaptive step parameters");
  }
}

double objective_3dtv(const VideoVolume& u, const FrameMeasurements& meas, double mu) {
  return tv3_value(u) + meas.data_term(u, mu);
}

VideoVolume preview_initialization(const FrameMeasurements& meas) {
  const std::size_t n_full = meas.side;
  VideoVolume init(n_full, meas.frame_count());
  for (std::size_t f = 0; f < meas.frame_count(); ++f) {
    const FrameData& fd = meas.frames[f];
    if (fd.samples == 0) continue;
    // Finest dyadic resolution whose groups are all sampled.
    for (std::size_t n = n_full; n >= 1; n /= 2) {
      const std::size_t block = (n_full / n) * (n_full / n);
      std::vector<double> mean(n * n, 0.0);
      bool complete = true;
      for (std::size_t g = 0; g < n * n && complete; ++g) {
        double c = 0.0, s = 0.0;
        for (std::size_t j = g * block; j < (g + 1) * block; ++j) {
          c += fd.counts[j];
          s += fd.sums[j];
        }
        if (c == 0.0) complete = false;
        else mean[g] = s / c;
      }
      if (!complete) continue;
      stone_transform_inplace(mean);
      DyadicImage coarse(n);
      devectorize_into(mean, PixelOrdering(n), coarse.pixels());
      DyadicImage fine = upsample_nearest(coarse, n_full);
      std::copy(fine.pixels().begin(), fine.pixels().end(), init.frame(f).begin());
      break;
    }
  }
  return init;
}

SolveResult solve_3dtv(const FrameMeasurements& meas, const SolverConfig& config,
                       const std::optional<VideoVolume>& init) {
  config.validate();
  if (meas.frame_count() < 1) fail(ErrorCode::InvalidDimension, "no frames to reconstruct");
  const std::size_t n = meas.side;
  const std::size_t frames = meas.frame_count();

  VideoVolume u = init ? *init
                       : (config.init == InitMode::Preview ? preview_initialization(meas)
                                                           : VideoVolume(n, frames));
  check_match(u, meas);

  const PixelOrdering ord(n);
  const auto start = std::chrono::steady_clock::now();
  const double scale = 1.0 / std::sqrt(static_cast<double>(u.size()));

  DualField p(n, frames);
  DualField p_next(n, frames);
  DualField grad_u(n, frames);
  DualField grad_next(n, frames);
  VideoVolume gtp(n, frames);       // grad3^T p_k, zero for p = 0
  VideoVolume gtp_next(n, frames);
  VideoVolume u_hat(n, frames);
  VideoVolume u_next(n, frames);
  std::vector<double> coef(n * n);
  grad3_into(u.data(), n, frames, grad_u);

  double tau = config.tau;
  double sigma = config.sigma;
  double alpha = config.adapt_alpha;

  SolveResult result{u, {}, 0, false, tau, sigma};
  result.trace.reserve(config.max_iters);

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    // Primal: gradient step on the coupling, then the exact data prox.
    for (std::size_t k = 0; k < u.size(); ++k) u_hat.data()[k] = u.data()[k] - tau * gtp.data()[k];
    double data_acc = 0.0;
    for (std::size_t f = 0; f < frames; ++f) {
      data_prox_frame(u_hat.frame(f), meas.frames[f], ord, config.mu, tau, coef, u_next.frame(f));
      data_acc += frame_data_term(coef, meas.frames[f]);
    }
    if (!all_finite(u_next.data())) throw DivergenceError(it);

    // Dual: ascent at the over-relaxed point, then projection.
    grad3_into(u_next.data(), n, frames, grad_next);
    auto relax = [&](const std::vector<double>& pk, const std::vector<double>& gn,
                     const std::vector<double>& go, std::vector<double>& out) {
      for (std::size_t k = 0; k < pk.size(); ++k) out[k] = pk[k] + sigma * (2.0 * gn[k] - go[k]);
    };
    relax(p.px, grad_next.px, grad_u.px, p_next.px);
    relax(p.py, grad_next.py, grad_u.py, p_next.py);
    relax(p.pt, grad_next.pt, grad_u.pt, p_next.pt);
    project_dual_inplace(p_next, config.projection);
    grad3_adjoint_into(p_next, gtp_next.data());

    // Residuals of the optimality conditions at (u_next, p_next).
    double primal_sq = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double r = (u.data()[k] - u_next.data()[k]) / tau -
                       (gtp.data()[k] - gtp_next.data()[k]);
      primal_sq += r * r;
    }
    double dual_sq = 0.0;
    auto dual_part = [&](const std::vector<double>& pk, const std::vector<double>& pn,
                         const std::vector<double>& go, const std::vector<double>& gn) {
      for (std::size_t k = 0; k < pk.size(); ++k) {
        const double r = (pk[k] - pn[k]) / sigma - (go[k] - gn[k]);
        dual_sq += r * r;
      }
    };
    dual_part(p.px, p_next.px, grad_u.px, grad_next.px);
    dual_part(p.py, p_next.py, grad_u.py, grad_next.py);
    dual_part(p.pt, p_next.pt, grad_u.pt, grad_next.pt);
    const double primal_res = std::sqrt(primal_sq) * scale;
    const double dual_res = std::sqrt(dual_sq) * scale;
    if (!std::isfinite(primal_res) || !std::isfinite(dual_res)) throw DivergenceError(it);

    double tv = 0.0;
    for (std::size_t k = 0; k < grad_next.px.size(); ++k) {
      tv += std::sqrt(grad_next.px[k] * grad_next.px[k] + grad_next.py[k] * grad_next.py[k]);
    }
    for (double v : grad_next.pt) tv += std::abs(v);
    const double objective = tv + 0.5 * config.mu * data_acc;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trace.push_back({it, objective, primal_res, dual_res, elapsed});

    std::swap(u, u_next);
    std::swap(p, p_next);
    std::swap(grad_u, grad_next);
    std::swap(gtp, gtp_next);
    result.iterations = it;

    if (primal_res < config.tol && dual_res < config.tol) {
      result.converged = true;
      break;
    }
    if (config.adaptive) {
      if (primal_res > config.adapt_ratio * dual_res) {
        tau /= (1.0 - alpha);
        sigma *= (1.0 - alpha);
        alpha *= config.adapt_decay;
      } else if (dual_res > config.adapt_ratio * primal_res) {
        tau *= (1.0 - alpha);
        sigma /= (1.0 - alpha);
        alpha *= config.adapt_decay;
      }
    }
  }
  result.volume = std::move(u);
  result.final_tau = tau;
  result.final_sigma = sigma;
  return result;
}

DyadicImage solve_single_frame(const FrameMeasurements& meas, const SolverConfig& config) {
  if (meas.frame_count() != 1) fail(ErrorCode::InvalidDimension, "expected exactly one frame");
  return solve_3dtv(meas, config).volume.frame_image(0);
}

std::string trace_to_csv(std::span<const TraceEntry> trace) {
  std::ostringstream os;
  os << "iteration,objective,primal_residual,dual_residual,elapsed_seconds\n";
  char buf[160];
  for (const auto& t : trace) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.6f\n", t.iteration, t.objective,
                  t.primal_residual, t.dual_residual, t.elapsed_seconds);
    os << buf;
  }
  return os.str();
}

}  // namespace stone
