// Exercises the shared library through its C header only.
#include "doctest.h"

#include "stone/stone.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using Image = std::unique_ptr<stone_image, Deleter<stone_image, stone_image_destroy>>;
using Vector = std::unique_ptr<stone_vector, Deleter<stone_vector, stone_vector_destroy>>;
using Video = std::unique_ptr<stone_video, Deleter<stone_video, stone_video_destroy>>;
using Schedule = std::unique_ptr<stone_schedule, Deleter<stone_schedule, stone_schedule_destroy>>;
using Stream = std::unique_ptr<stone_stream, Deleter<stone_stream, stone_stream_destroy>>;
using Recon = std::unique_ptr<stone_recon, Deleter<stone_recon, stone_recon_destroy>>;
using Catalog = std::unique_ptr<stone_catalog, Deleter<stone_catalog, stone_catalog_destroy>>;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("stone_capi_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const char* name) const { return (path / name).string(); }
};

std::vector<double> random_pixels(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(count);
  for (double& x : v) x = dist(rng);
  return v;
}

Image make_image(std::uint32_t side, const std::vector<double>& px) {
  stone_image* raw = nullptr;
  REQUIRE(stone_image_create(side, px.data(), &raw) == STONE_OK);
  return Image(raw);
}

Image square_image(std::uint32_t side, std::uint32_t row, std::uint32_t col, std::uint32_t size) {
  std::vector<double> px(side * side, 0.1);
  for (std::uint32_t r = row; r < row + size && r < side; ++r)
    for (std::uint32_t c = col; c < col + size && c < side; ++c) px[r * side + c] = 0.9;
  return make_image(side, px);
}

Video make_video(const std::vector<const stone_image*>& frames) {
  stone_video* raw = nullptr;
  REQUIRE(stone_video_create(&raw) == STONE_OK);
  Video v(raw);
  for (const auto* f : frames) REQUIRE(stone_video_append(v.get(), f) == STONE_OK);
  return v;
}

Stream make_stream(const stone_video* video, std::uint64_t seed, std::uint32_t mpf) {
  stone_schedule* sraw = nullptr;
  REQUIRE(stone_schedule_create(stone_video_side(video), seed, &sraw) == STONE_OK);
  Schedule sched(sraw);
  stone_stream* raw = nullptr;
  REQUIRE(stone_acquire(video, sched.get(), mpf, 0.0, 0, &raw) == STONE_OK);
  return Stream(raw);
}

}  // namespace

TEST_CASE("status names, version and last error") {
  CHECK(std::string(stone_status_name(STONE_OK)) == "ok");
  CHECK(std::string(stone_status_name(STONE_ERR_INVALID_DIMENSION)) == "invalid-dimension");
  CHECK(std::string(stone_status_name(STONE_ERR_NULL_ARGUMENT)) == "null-argument");
  CHECK(std::string(stone_status_name(static_cast<stone_status>(1234))) == "unknown");
  CHECK(std::strlen(stone_version()) > 0);

  stone_image* img = nullptr;
  CHECK(stone_image_create(3, nullptr, &img) == STONE_ERR_INVALID_DIMENSION);
  CHECK(img == nullptr);
  CHECK(std::strlen(stone_last_error()) > 0);
  CHECK(stone_image_create(4, nullptr, &img) == STONE_OK);
  stone_image_destroy(img);
}

TEST_CASE("null arguments are rejected without crashing") {
  CHECK(stone_image_create(4, nullptr, nullptr) == STONE_ERR_NULL_ARGUMENT);
  CHECK(stone_image_forward(nullptr, nullptr) == STONE_ERR_NULL_ARGUMENT);
  CHECK(stone_transform_inplace(nullptr, 4) == STONE_ERR_NULL_ARGUMENT);
  CHECK(stone_preview(nullptr, 0, 1, nullptr, nullptr) == STONE_ERR_NULL_ARGUMENT);
  CHECK(stone_reconstruct(nullptr, 0, 0, nullptr, nullptr) == STONE_ERR_NULL_ARGUMENT);
  CHECK(stone_classify(nullptr, nullptr, 1, 0, nullptr) == STONE_ERR_NULL_ARGUMENT);
  CHECK(stone_stream_info_get(nullptr, nullptr) == STONE_ERR_NULL_ARGUMENT);
  CHECK(stone_image_side(nullptr) == 0);
  CHECK(stone_video_frame(nullptr, 0) == nullptr);
  stone_image_destroy(nullptr);
  stone_video_destroy(nullptr);
  stone_stream_destroy(nullptr);
  stone_recon_destroy(nullptr);
  stone_catalog_destroy(nullptr);
  stone_selftest_destroy(nullptr);
}

TEST_CASE("transform through handles") {
  double v[4] = {1, 0, 0, 0};
  CHECK(stone_transform_inplace(v, 4) == STONE_OK);
  CHECK(v[0] == -0.5);
  CHECK(v[1] == 0.5);
  double bad[8] = {};
  CHECK(stone_transform_inplace(bad, 8) == STONE_ERR_INVALID_DIMENSION);

  const auto px = random_pixels(256, 3);
  const Image img = make_image(16, px);
  CHECK(stone_image_side(img.get()) == 16);
  stone_vector* craw = nullptr;
  REQUIRE(stone_image_forward(img.get(), &craw) == STONE_OK);
  const Vector coef(craw);
  CHECK(stone_vector_length(coef.get()) == 256);
  CHECK(stone_vector_side(coef.get()) == 16);
  stone_image* back_raw = nullptr;
  REQUIRE(stone_image_inverse(stone_vector_data(coef.get()), 256, &back_raw) == STONE_OK);
  const Image back(back_raw);
  double err = 0.0;
  for (std::size_t k = 0; k < 256; ++k) err = std::max(err, std::abs(stone_image_pixels(back.get())[k] - px[k]));
  CHECK(err <= 1e-12);
  stone_image* none = nullptr;
  CHECK(stone_image_inverse(stone_vector_data(coef.get()), 64 * 2, &none) == STONE_ERR_INVALID_DIMENSION);

  TempDir tmp;
  REQUIRE(stone_coefficients_write(stone_vector_data(coef.get()), 256, (tmp / "c.bin").c_str()) == STONE_OK);
  stone_vector* read_raw = nullptr;
  REQUIRE(stone_coefficients_read((tmp / "c.bin").c_str(), &read_raw) == STONE_OK);
  const Vector read(read_raw);
  CHECK(std::memcmp(stone_vector_data(read.get()), stone_vector_data(coef.get()), 256 * sizeof(double)) == 0);
}

TEST_CASE("image and video files") {
  TempDir tmp;
  const Image a = square_image(8, 2, 2, 3);
  REQUIRE(stone_image_write(a.get(), (tmp / "a.f32").c_str(), STONE_FORMAT_AUTO) == STONE_OK);
  stone_image* raw = nullptr;
  REQUIRE(stone_image_read((tmp / "a.f32").c_str(), &raw) == STONE_OK);
  const Image b(raw);
  for (std::size_t k = 0; k < 64; ++k)
    CHECK(stone_image_pixels(b.get())[k] == static_cast<double>(static_cast<float>(stone_image_pixels(a.get())[k])));
  CHECK(stone_image_write(a.get(), (tmp / "a.png").c_str(), STONE_FORMAT_AUTO) == STONE_ERR_INVALID_ARGUMENT);
  CHECK(stone_image_read((tmp / "missing.pgm").c_str(), &raw) == STONE_ERR_IO);

  const Image c = square_image(8, 3, 3, 3);
  const Image wrong = square_image(16, 0, 0, 1);
  Video v = make_video({a.get(), c.get()});
  CHECK(stone_video_append(v.get(), wrong.get()) == STONE_ERR_INVALID_DIMENSION);
  CHECK(stone_video_frame_count(v.get()) == 2);
  CHECK(stone_video_frame(v.get(), 2) == nullptr);
  REQUIRE(stone_video_write_dir(v.get(), (tmp / "frames").c_str(), STONE_FORMAT_PGM16) == STONE_OK);
  stone_video* vraw = nullptr;
  REQUIRE(stone_video_read_dir((tmp / "frames").c_str(), &vraw) == STONE_OK);
  const Video back(vraw);
  CHECK(stone_video_frame_count(back.get()) == 2);
  CHECK(stone_image_pixels(stone_video_frame(back.get(), 1))[3 * 8 + 3] == doctest::Approx(0.9).epsilon(1e-4));

  REQUIRE(stone_video_add_noise(v.get(), 0.1, 5) == STONE_OK);
  CHECK(stone_image_pixels(stone_video_frame(v.get(), 0))[0] != 0.1);
}

TEST_CASE("acquire, stream files and preview") {
  const Image f0 = square_image(16, 4, 4, 8);
  const Video video = make_video({f0.get(), f0.get()});
  const Stream stream = make_stream(video.get(), 9, 256);

  stone_stream_info info{};
  REQUIRE(stone_stream_info_get(stream.get(), &info) == STONE_OK);
  CHECK(info.side == 16);
  CHECK(info.measurements_per_frame == 256);
  CHECK(info.frame_count == 2);
  CHECK(info.record_count == 512);
  CHECK(info.schedule_seed == 9);
  CHECK(info.first_position == 0);
  CHECK(info.last_position == 511);

  stone_record rec{};
  REQUIRE(stone_stream_record(stream.get(), 300, &rec) == STONE_OK);
  CHECK(rec.position == 300);
  CHECK(stone_stream_record(stream.get(), 512, &rec) == STONE_ERR_INVALID_ARGUMENT);

  TempDir tmp;
  REQUIRE(stone_stream_write(stream.get(), (tmp / "s.sto").c_str()) == STONE_OK);
  stone_stream* sraw = nullptr;
  REQUIRE(stone_stream_read((tmp / "s.sto").c_str(), &sraw) == STONE_OK);
  const Stream back(sraw);
  for (std::size_t i = 0; i < 512; i += 37) {
    stone_record a{}, b{};
    stone_stream_record(stream.get(), i, &a);
    stone_stream_record(back.get(), i, &b);
    CHECK(a.row_index == b.row_index);
    CHECK(a.value == b.value);
  }
  std::ofstream(tmp / "junk.sto") << "not a stream";
  CHECK(stone_stream_read((tmp / "junk.sto").c_str(), &sraw) == STONE_ERR_FORMAT);

  // The square is block-constant at n = 4, so the preview is exact.
  stone_image* praw = nullptr;
  stone_preview_info pinfo{};
  REQUIRE(stone_preview(stream.get(), STONE_LATEST_POSITION, 4, &praw, &pinfo) == STONE_OK);
  const Image pv(praw);
  CHECK(pinfo.window_start == 496);
  CHECK(pinfo.window_count == 16);
  CHECK(pinfo.bins_hit == 16);
  CHECK(stone_image_side(pv.get()) == 4);
  CHECK(stone_image_pixels(pv.get())[0] == doctest::Approx(0.1));
  CHECK(stone_image_pixels(pv.get())[5] == doctest::Approx(0.9));
  CHECK(stone_preview(stream.get(), 10, 4, &praw, nullptr) == STONE_ERR_INVALID_WINDOW);
  CHECK(stone_preview(stream.get(), 100, 3, &praw, nullptr) == STONE_ERR_INVALID_DIMENSION);
}

TEST_CASE("reconstruction handle") {
  const Image f0 = square_image(8, 2, 1, 3);
  const Image f1 = square_image(8, 2, 2, 3);
  const Video video = make_video({f0.get(), f1.get()});
  const Stream stream = make_stream(video.get(), 3, 32);

  stone_solver_config cfg;
  stone_solver_config_default(&cfg);
  CHECK(cfg.mu == 500.0);
  CHECK(cfg.max_iters == 2000);
  CHECK(cfg.adaptive == 0);
  cfg.max_iters = 300;

  stone_recon* raw = nullptr;
  REQUIRE(stone_reconstruct(stream.get(), 0, 0, &cfg, &raw) == STONE_OK);
  const Recon recon(raw);
  const stone_video* out = stone_recon_video(recon.get());
  CHECK(stone_video_frame_count(out) == 2);
  CHECK(stone_video_side(out) == 8);
  CHECK(stone_recon_iterations(recon.get()) <= 300);
  CHECK(stone_recon_trace_length(recon.get()) == stone_recon_iterations(recon.get()));
  stone_trace_entry e{};
  REQUIRE(stone_recon_trace_entry(recon.get(), 0, &e) == STONE_OK);
  CHECK(e.iteration == 1);
  CHECK(stone_recon_trace_entry(recon.get(), 100000, &e) == STONE_ERR_INVALID_ARGUMENT);

  TempDir tmp;
  REQUIRE(stone_recon_write_trace(recon.get(), (tmp / "trace.csv").c_str()) == STONE_OK);
  std::ifstream in(tmp / "trace.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "iteration,objective,primal_residual,dual_residual,elapsed_seconds");

  cfg.mu = -1.0;
  CHECK(stone_reconstruct(stream.get(), 0, 0, &cfg, &raw) == STONE_ERR_INVALID_ARGUMENT);
  stone_solver_config_default(&cfg);
  CHECK(stone_reconstruct(stream.get(), 100, 0, &cfg, &raw) == STONE_ERR_INVALID_WINDOW);
}

TEST_CASE("catalog and classification") {
  stone_catalog* raw = nullptr;
  REQUIRE(stone_catalog_create(&raw) == STONE_OK);
  const Catalog cat(raw);
  const Image sq = square_image(32, 8, 8, 8);
  const Image bar = square_image(32, 0, 4, 4);
  const Image small = square_image(16, 0, 0, 4);
  REQUIRE(stone_catalog_add(cat.get(), "square", sq.get()) == STONE_OK);
  REQUIRE(stone_catalog_add(cat.get(), "bar", bar.get()) == STONE_OK);
  CHECK(stone_catalog_add(cat.get(), "square", bar.get()) == STONE_ERR_INVALID_ARGUMENT);
  CHECK(stone_catalog_add(cat.get(), "small", small.get()) == STONE_ERR_INVALID_DIMENSION);
  CHECK(stone_catalog_add(cat.get(), std::string(300, 'x').c_str(), sq.get()) == STONE_ERR_INVALID_ARGUMENT);
  CHECK(stone_catalog_size(cat.get()) == 2);

  const Image scene = square_image(32, 12, 16, 8);  // the square moved by (8, 4)
  const Video video = make_video({scene.get()});
  const Stream stream = make_stream(video.get(), 2, 1024);
  stone_match m{};
  REQUIRE(stone_classify(stream.get(), cat.get(), 8, STONE_LATEST_POSITION, &m) == STONE_OK);
  CHECK(std::string(m.template_name) == "square");
  CHECK(m.dx == 2);
  CHECK(m.dy == 1);
  CHECK(m.score <= 1e-10);
  CHECK(m.preview_side == 8);

  stone_catalog* empty_raw = nullptr;
  REQUIRE(stone_catalog_create(&empty_raw) == STONE_OK);
  const Catalog empty(empty_raw);
  CHECK(stone_classify(stream.get(), empty.get(), 8, STONE_LATEST_POSITION, &m) == STONE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("self test through the C API") {
  stone_selftest_report* raw = nullptr;
  REQUIRE(stone_selftest_run(&raw) == STONE_OK);
  const std::size_t count = stone_selftest_count(raw);
  CHECK(count >= 5);
  for (std::size_t i = 0; i < count; ++i) {
    const char* name = nullptr;
    const char* detail = nullptr;
    int passed = 0;
    REQUIRE(stone_selftest_check(raw, i, &name, &passed, &detail) == STONE_OK);
    CHECK_MESSAGE(passed == 1, name << ": " << detail);
  }
  const char* name = nullptr;
  int passed = 0;
  CHECK(stone_selftest_check(raw, count, &name, &passed, nullptr) == STONE_ERR_INVALID_ARGUMENT);
  stone_selftest_destroy(raw);
}
