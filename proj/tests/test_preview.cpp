#include "doctest.h"
#include "oracles.hpp"

#include "stone/error.hpp"
#include "stone/preview.hpp"
#include "stone/sampling.hpp"

#include <numeric>

using namespace stone;

namespace {

std::vector<WindowSample> window_of(const MeasurementStream& st, std::size_t first, std::size_t count) {
  std::vector<WindowSample> w;
  for (std::size_t i = first; i < first + count; ++i) w.push_back({st.records[i].row_index, st.records[i].value});
  return w;
}

// Image constant on every d x d patch, with distinct patch values.
DyadicImage block_constant(std::size_t side, std::size_t n, std::uint64_t seed) {
  return oracle::nearest_up(oracle::random_image(n, seed), side);
}

}  // namespace

TEST_CASE("rebin examples") {
  SUBCASE("one sample per group is a re-indexing") {
    std::vector<WindowSample> w{{5, 1.5}, {1, -2.0}, {14, 0.25}, {8, 4.0}};
    const auto rb = rebin(w, 4, 2);
    CHECK(rb.values == std::vector<double>{-2.0, 1.5, 4.0, 0.25});
    CHECK(rb.counts == std::vector<std::uint32_t>{1, 1, 1, 1});
  }
  SUBCASE("means") {
    std::vector<WindowSample> w{{0, 1.0}, {3, 3.0}, {4, 0.7}, {6, 0.7}, {9, 5}, {15, 6}};
    const auto rb = rebin(w, 4, 2);
    CHECK(rb.values[0] == 2.0);
    CHECK(rb.values[1] == 0.7);
    CHECK(rb.counts == std::vector<std::uint32_t>{2, 2, 1, 1});
  }
  SUBCASE("incomplete") {
    std::vector<WindowSample> w{{0, 1.0}, {9, 2.0}};
    try {
      rebin(w, 4, 2);
      FAIL("expected incomplete-preview");
    } catch (const IncompletePreviewError& e) {
      CHECK(e.code() == ErrorCode::IncompletePreview);
      CHECK(e.empty_groups() == std::vector<std::size_t>{1, 3});
      CHECK(std::string(e.what()).find("1, 3") != std::string::npos);
    }
    const auto partial = rebin_partial(w, 4, 2);
    CHECK(partial.empty_groups() == std::vector<std::size_t>{1, 3});
    CHECK_THROWS_AS(preview(partial), IncompletePreviewError);
  }
  SUBCASE("bad arguments") {
    std::vector<WindowSample> w{{16, 1.0}};
    CHECK_THROWS_AS(rebin(w, 4, 2), Error);
    CHECK_THROWS_AS(rebin({}, 4, 8), Error);
    CHECK_THROWS_AS(rebin({}, 4, 3), Error);
  }
}

TEST_CASE("preview examples") {
  const std::size_t side = 16;
  const auto sched = build_schedule(side, 5);

  SUBCASE("constant image") {
    const std::vector<DyadicImage> frames{DyadicImage(side, 0.42)};
    const auto st = acquire(frames, sched, 256, 0.0, 0);
    for (std::size_t n = 1; n <= side; n *= 2) {
      const auto pv = preview_from_stream(st, 255, n);
      CHECK(oracle::max_abs_diff(pv.image, DyadicImage(n, 0.42)) <= 1e-12);
    }
  }

  SUBCASE("full sampling reproduces the image") {
    const auto img = oracle::random_image(side, 8);
    const std::vector<DyadicImage> frames{img, img};
    const auto st = acquire(frames, sched, 256, 0.0, 0);
    for (std::uint64_t at : {255ull, 300ull, 511ull}) {
      const auto pv = preview_from_stream(st, at, side);
      CHECK(oracle::max_abs_diff(pv.image, img) <= 1e-10);
    }
  }

  SUBCASE("n = 1 is the group-0 mean, i.e. the newest record") {
    const auto img = oracle::random_image(side, 9);
    const std::vector<DyadicImage> frames{img};
    const auto st = acquire(frames, sched, 256, 0.0, 0);
    for (std::uint64_t at = 0; at < 256; at += 17) {
      const auto pv = preview_from_stream(st, at, 1);
      CHECK(pv.image.at(0, 0) == st.records[at].value);
      CHECK(pv.window_start == at);
      CHECK(pv.window_count == 1);
    }
  }

  SUBCASE("window bookkeeping") {
    const std::vector<DyadicImage> frames{oracle::random_image(side, 2)};
    const auto st = acquire(frames, sched, 256, 0.0, 0);
    const auto pv = preview_from_stream(st, 100, 4);
    CHECK(pv.window_start == 85);
    CHECK(pv.window_count == 16);
    CHECK(pv.source_side == 16);
    CHECK(pv.bins_hit == 16);
    CHECK(pv.image.side() == 4);
  }

  SUBCASE("errors") {
    const std::vector<DyadicImage> frames{oracle::random_image(side, 2)};
    const auto st = acquire(frames, sched, 256, 0.0, 0);
    try {
      preview_from_stream(st, 14, 4);
      FAIL("expected invalid-window");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidWindow);
    }
    try {
      preview_from_stream(st, 400, 4);
      FAIL("expected invalid-window");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidWindow);
    }
    CHECK_THROWS_AS(preview_from_stream(st, 100, 3), Error);
    CHECK_THROWS_AS(preview_from_stream(st, 100, 32), Error);
  }
}

TEST_CASE("sliding by one record changes at most one group") {
  const std::size_t side = 16, n = 4;
  const std::vector<DyadicImage> frames{oracle::random_image(side, 4)};
  const auto sched = build_schedule(side, 6);
  const auto st = acquire(frames, sched, 256, 0.0, 0);
  for (std::size_t end = 16; end < 256; ++end) {
    const auto a = rebin(window_of(st, end - 16, 16), side, n);
    const auto b = rebin(window_of(st, end - 15, 16), side, n);
    std::size_t changed = 0;
    for (std::size_t g = 0; g < 16; ++g) changed += a.values[g] != b.values[g];
    CHECK(changed <= 1);
  }
}

TEST_CASE("property: block-constant images are recovered exactly at every offset") {
  const std::size_t side = 16;
  for (std::size_t n = 1; n <= side; n *= 2) {
    const auto img = block_constant(side, n, 30 + n);
    const auto expected = oracle::patch_means(img, n);
    const std::vector<DyadicImage> frames{img, img};
    const auto st = acquire(frames, build_schedule(side, n), 256, 0.0, 0);
    double err = 0.0;
    for (std::uint64_t at = n * n - 1; at < st.records.size(); ++at) {
      const auto pv = preview_from_stream(st, at, n);
      CHECK(pv.bins_hit == n * n);
      err = std::max(err, oracle::max_abs_diff(pv.image, expected));
    }
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("property: every schedule window yields a complete preview") {
  const std::size_t side = 8;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const std::vector<DyadicImage> frames{oracle::random_image(side, seed), oracle::random_image(side, seed + 50)};
    const auto st = acquire(frames, build_schedule(side, seed), 64, 0.0, 0);
    for (std::size_t n = 1; n <= side; n *= 2)
      for (std::uint64_t at = n * n - 1; at < st.records.size(); ++at)
        CHECK(preview_from_stream(st, at, n).bins_hit == n * n);
  }
}

TEST_CASE("property: the preview is the least-squares solution (dense oracle, N = 8)") {
  const std::size_t side = 8;
  const auto img = oracle::random_image(side, 77);
  const std::vector<DyadicImage> frames{img};
  const auto sched = build_schedule(side, 13);
  const auto st = acquire(frames, sched, 64, 0.0, 0);
  // Also a noisy stream so the data are inconsistent and the fit is not exact.
  const auto noisy = acquire(frames, sched, 64, 0.2, 5);
  double err = 0.0;
  for (const auto* s : {&st, &noisy}) {
    for (std::size_t n = 1; n <= side; n *= 2) {
      for (std::size_t count : {n * n, n * n + 3, 2 * n * n, std::size_t{64}}) {
        if (count > 64) continue;
        for (std::size_t first = 0; first + count <= 64; first += 5) {
          const auto w = window_of(*s, first, count);
          const auto rb = rebin_partial(w, side, n);
          if (!rb.empty_groups().empty()) continue;
          std::vector<std::uint32_t> rows;
          std::vector<double> values;
          for (const auto& x : w) {
            rows.push_back(x.row_index);
            values.push_back(x.value);
          }
          err = std::max(err, oracle::max_abs_diff(preview(rb).image, oracle::preview_lsq(side, n, rows, values)));
        }
      }
    }
  }
  CHECK(err <= 1e-8);
}

TEST_CASE("property: mean and variance of random one-per-group previews") {
  // Smaller draw count than the acceptance run; same statement.
  const std::size_t side = 16, n = 4, d2 = 16, draws = 20000;
  const auto img = oracle::random_image(side, 2024);
  const Eigen::VectorXd coef = oracle::stone_matrix(4) * oracle::vec_of(img);
  const auto patch = oracle::patch_means(img, n);
  double mean_patch_var = 0.0;
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      const double e = img.at(r, c) - patch.at(r / 4, c / 4);
      mean_patch_var += e * e;
    }
  mean_patch_var /= static_cast<double>(side * side);

  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::uint32_t> pick(0, d2 - 1);
  std::vector<double> sum(n * n, 0.0), sq(n * n, 0.0);
  const PixelOrdering ord(n);
  std::vector<WindowSample> w(n * n);
  for (std::size_t t = 0; t < draws; ++t) {
    for (std::uint32_t g = 0; g < n * n; ++g) {
      const std::uint32_t row = g * d2 + pick(rng);
      w[g] = {row, coef(row)};
    }
    const auto pv = preview(rebin(w, side, n), ord);
    for (std::size_t k = 0; k < n * n; ++k) {
      sum[k] += pv.image.pixels()[k];
      sq[k] += pv.image.pixels()[k] * pv.image.pixels()[k];
    }
  }
  for (std::size_t k = 0; k < n * n; ++k) {
    const double mean = sum[k] / draws;
    const double var = sq[k] / draws - mean * mean;
    const double se = std::sqrt(var / draws);
    CHECK(std::abs(mean - patch.pixels()[k]) <= 3.0 * se);
    CHECK(std::abs(var - mean_patch_var) <= 0.05 * mean_patch_var);
  }
}

TEST_CASE("property: the transform preserves mean and variance") {
  for (int k = 1; k <= 4; ++k) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      std::mt19937_64 rng(seed + 10 * k);
      std::normal_distribution<double> dist(0.3, 2.0);
      std::vector<double> v(pow4(k));
      for (double& x : v) x = dist(rng);
      const auto sv = stone_transform(std::span<const double>(v));
      auto stats = [](const std::vector<double>& x) {
        const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
        double var = 0.0;
        for (double y : x) var += (y - m) * (y - m);
        return std::pair{m, var / static_cast<double>(x.size())};
      };
      const auto [mv, vv] = stats(v);
      const auto [ms, vs] = stats(sv);
      CHECK(std::abs(mv - ms) <= 1e-10);
      CHECK(std::abs(vv - vs) <= 1e-10);
    }
  }
}
