#include "stone/selftest.hpp"

#include "stone/preview.hpp"
#include "stone/recon.hpp"
#include "stone/sampling.hpp"
#include "stone/transform.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <set>

namespace stone {

namespace {

std::string fmt_err(double err) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "max error %.3e", err);
  return buf;
}

SelfTestCheck check_orthogonality() {
  const DenseMatrix s = dense_stone(3);
  double err = 0.0;
  for (std::size_t i = 0; i < s.rows; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < s.cols; ++j) {
      row_sum += s(i, j);
      double dot = 0.0;
      for (std::size_t k = 0; k < s.rows; ++k) dot += s(k, i) * s(k, j);
      err = std::max(err, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
    err = std::max(err, std::abs(row_sum - 1.0));
  }
  return {"orthogonality", err <= 1e-12, fmt_err(err)};
}

SelfTestCheck check_involution() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(pow4(5));
  for (double& v : x) v = dist(rng);
  auto y = stone_transform(stone_transform(std::span<const double>(x)));
  double err = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) err = std::max(err, std::abs(y[k] - x[k]));
  const DenseMatrix s = dense_stone(3);
  std::vector<double> z(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(pow4(3)));
  auto fast = stone_transform(std::span<const double>(z));
  auto dense = s.apply(z);
  for (std::size_t k = 0; k < z.size(); ++k) err = std::max(err, std::abs(fast[k] - dense[k]));
  return {"involution+dense", err <= 1e-10, fmt_err(err)};
}

SelfTestCheck check_window_property() {
  constexpr std::size_t side = 8;
  std::size_t violations = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto sched = build_schedule(side, seed);
    for (std::size_t n = 1; n <= side; n *= 2) {
      const std::size_t block = (side / n) * (side / n);
      for (std::size_t start = 0; start < sched.length(); ++start) {
        std::set<std::uint32_t> groups;
        for (std::size_t j = 0; j < n * n; ++j) groups.insert(sched.row_at(start + j) / block);
        if (groups.size() != n * n) ++violations;
      }
    }
  }
  return {"window-property", violations == 0, std::to_string(violations) + " violation(s)"};
}

SelfTestCheck check_adjoint() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VideoVolume u(4, 3);
  for (double& v : u.data()) v = dist(rng);
  DualField p(4, 3);
  for (double& v : p.px) v = dist(rng);
  for (double& v : p.py) v = dist(rng);
  for (double& v : p.pt) v = dist(rng);
  const DualField g = grad3(u);
  const VideoVolume gt = grad3_adjoint(p);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t k = 0; k < g.px.size(); ++k) lhs += g.px[k] * p.px[k] + g.py[k] * p.py[k];
  for (std::size_t k = 0; k < g.pt.size(); ++k) lhs += g.pt[k] * p.pt[k];
  for (std::size_t k = 0; k < u.size(); ++k) rhs += u.data()[k] * gt.data()[k];
  const double err = std::abs(lhs - rhs);
  return {"gradient-adjoint", err <= 1e-10, fmt_err(err)};
}

SelfTestCheck check_preview_exactness() {
  constexpr std::size_t side = 16, n = 4;
  DyadicImage coarse(n);
  for (std::size_t k = 0; k < coarse.pixel_count(); ++k) coarse.pixels()[k] = 0.05 * static_cast<double>(k);
  const DyadicImage img = upsample_nearest(coarse, side);
  const auto sched = build_schedule(side, 3);
  const std::vector<DyadicImage> frames{img};
  const MeasurementStream stream = acquire(frames, sched, side * side, 0.0, 0);
  double err = 0.0;
  for (std::uint64_t at = n * n - 1; at < stream.records.size(); ++at) {
    const PreviewImage pv = preview_from_stream(stream, at, n);
    for (std::size_t k = 0; k < coarse.pixel_count(); ++k) {
      err = std::max(err, std::abs(pv.image.pixels()[k] - coarse.pixels()[k]));
    }
  }
  return {"preview-exactness", err <= 1e-10, fmt_err(err)};
}

}  // namespace

std::vector<SelfTestCheck> run_selftest() {
  std::vector<SelfTestCheck> out;
  auto guarded = [&](SelfTestCheck (*fn)(), const char* name) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, e.what()});
    }
  };
  guarded(check_orthogonality, "orthogonality");
  guarded(check_involution, "involution+dense");
  guarded(check_window_property, "window-property");
  guarded(check_adjoint, "gradient-adjoint");
  guarded(check_preview_exactness, "preview-exactness");
  return out;
}

}  // namespace stone
