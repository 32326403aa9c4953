#include "stone/stone.h"

#include "stone/error.hpp"
#include "stone/file_util.hpp"
#include "stone/image_io.hpp"
#include "stone/preview.hpp"
#include "stone/recon.hpp"
#include "stone/sampling.hpp"
#include "stone/selftest.hpp"
#include "stone/smashed.hpp"
#include "stone/transform.hpp"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

struct stone_image {
  stone::DyadicImage img;
};

struct stone_vector {
  std::vector<double> values;
};

struct stone_video {
  std::vector<std::unique_ptr<stone_image>> frames;
};

struct stone_schedule {
  stone::MeasurementSchedule sched;
};

struct stone_stream {
  stone::MeasurementStream stream;
};

struct stone_recon {
  stone::SolveResult result;
  stone_video video;
};

struct stone_catalog {
  stone::HypothesisCatalog catalog;
};

struct stone_selftest_report {
  std::vector<stone::SelfTestCheck> checks;
};

namespace {

thread_local std::string g_last_error;

stone_status record(stone_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <class Fn>
stone_status guarded(Fn&& fn) {
  try {
    fn();
    return STONE_OK;
  } catch (const stone::Error& e) {
    return record(static_cast<stone_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return record(STONE_ERR_RESOURCE_LIMIT, "out of memory");
  } catch (const std::exception& e) {
    return record(STONE_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(STONE_ERR_INTERNAL, "unknown exception");
  }
}

#define STONE_REQUIRE(ptr)                                                   \
  do {                                                                       \
    if ((ptr) == nullptr) return record(STONE_ERR_NULL_ARGUMENT, #ptr " is null"); \
  } while (0)

stone::ImageFormat to_format(stone_image_format f, const char* path) {
  switch (f) {
    case STONE_FORMAT_PGM8: return stone::ImageFormat::Pgm8;
    case STONE_FORMAT_PGM16: return stone::ImageFormat::Pgm16;
    case STONE_FORMAT_RAW_F32: return stone::ImageFormat::RawF32;
    case STONE_FORMAT_AUTO: break;
  }
  return stone::format_from_path(path);
}

std::vector<stone::DyadicImage> frames_of(const stone_video& v) {
  std::vector<stone::DyadicImage> out;
  out.reserve(v.frames.size());
  for (const auto& f : v.frames) out.push_back(f->img);
  return out;
}

std::uint64_t resolve_position(const stone::MeasurementStream& s, std::uint64_t at) {
  if (at != STONE_LATEST_POSITION) return at;
  if (s.records.empty()) stone::fail(stone::ErrorCode::InvalidWindow, "stream has no records");
  return s.records.back().position;
}

}  // namespace

extern "C" {

const char* stone_status_name(stone_status status) {
  switch (status) {
    case STONE_OK: return "ok";
    case STONE_ERR_NULL_ARGUMENT: return "null-argument";
    case STONE_ERR_INTERNAL: return "internal";
    default: return stone::error_code_name(static_cast<stone::ErrorCode>(status));
  }
}

const char* stone_last_error(void) { return g_last_error.c_str(); }

const char* stone_version(void) { return "1.0.0"; }

stone_status stone_image_create(uint32_t side, const double* pixels, stone_image** out) {
  STONE_REQUIRE(out);
  return guarded([&] {
    stone::DyadicImage img =
        pixels ? stone::DyadicImage(side, std::vector<double>(pixels, pixels + std::size_t{side} * side))
               : stone::DyadicImage(side);
    *out = new stone_image{std::move(img)};
  });
}

void stone_image_destroy(stone_image* image) { delete image; }

uint32_t stone_image_side(const stone_image* image) {
  return image ? static_cast<uint32_t>(image->img.side()) : 0;
}

const double* stone_image_pixels(const stone_image* image) {
  return image ? image->img.pixels().data() : nullptr;
}

stone_status stone_image_read(const char* path, stone_image** out) {
  STONE_REQUIRE(path);
  STONE_REQUIRE(out);
  return guarded([&] { *out = new stone_image{stone::read_image(path)}; });
}

stone_status stone_image_write(const stone_image* image, const char* path, stone_image_format format) {
  STONE_REQUIRE(image);
  STONE_REQUIRE(path);
  return guarded([&] { stone::write_image(image->img, path, to_format(format, path)); });
}

void stone_vector_destroy(stone_vector* vec) { delete vec; }
size_t stone_vector_length(const stone_vector* vec) { return vec ? vec->values.size() : 0; }
const double* stone_vector_data(const stone_vector* vec) { return vec ? vec->values.data() : nullptr; }

uint32_t stone_vector_side(const stone_vector* vec) {
  if (!vec) return 0;
  const int k = stone::level_of_length(vec->values.size());
  return k < 0 ? 0 : static_cast<uint32_t>(std::size_t{1} << k);
}

stone_status stone_transform_inplace(double* data, size_t length) {
  STONE_REQUIRE(data);
  return guarded([&] { stone::stone_transform_inplace(std::span<double>(data, length)); });
}

stone_status stone_image_forward(const stone_image* image, stone_vector** out) {
  STONE_REQUIRE(image);
  STONE_REQUIRE(out);
  return guarded([&] {
    const stone::PixelOrdering ord(image->img.side());
    std::vector<double> coef(ord.size());
    stone::vectorize_into(image->img.pixels(), ord, coef);
    stone::stone_transform_inplace(coef);
    *out = new stone_vector{std::move(coef)};
  });
}

stone_status stone_image_inverse(const double* coef, size_t length, stone_image** out) {
  STONE_REQUIRE(coef);
  STONE_REQUIRE(out);
  return guarded([&] {
    const int k = stone::level_of_length(length);
    if (k < 0) stone::fail(stone::ErrorCode::InvalidDimension, "coefficient count is not a power of 4");
    std::vector<double> v(coef, coef + length);
    stone::stone_transform_inplace(v);
    const stone::PixelOrdering ord(std::size_t{1} << k);
    stone::DyadicImage img(ord.side());
    stone::devectorize_into(v, ord, img.pixels());
    *out = new stone_image{std::move(img)};
  });
}

stone_status stone_coefficients_write(const double* coef, size_t length, const char* path) {
  STONE_REQUIRE(coef);
  STONE_REQUIRE(path);
  return guarded([&] {
    const int k = stone::level_of_length(length);
    if (k < 0) stone::fail(stone::ErrorCode::InvalidDimension, "coefficient count is not a power of 4");
    stone::write_coefficients(std::vector<double>(coef, coef + length), std::size_t{1} << k, path);
  });
}

stone_status stone_coefficients_read(const char* path, stone_vector** out) {
  STONE_REQUIRE(path);
  STONE_REQUIRE(out);
  return guarded([&] { *out = new stone_vector{stone::read_coefficients(path).first}; });
}

stone_status stone_video_create(stone_video** out) {
  STONE_REQUIRE(out);
  return guarded([&] { *out = new stone_video{}; });
}

void stone_video_destroy(stone_video* video) { delete video; }

stone_status stone_video_append(stone_video* video, const stone_image* frame) {
  STONE_REQUIRE(video);
  STONE_REQUIRE(frame);
  return guarded([&] {
    if (!video->frames.empty() && video->frames.front()->img.side() != frame->img.side()) {
      stone::fail(stone::ErrorCode::InvalidDimension, "frame side differs from the video's");
    }
    video->frames.push_back(std::make_unique<stone_image>(*frame));
  });
}

size_t stone_video_frame_count(const stone_video* video) { return video ? video->frames.size() : 0; }

uint32_t stone_video_side(const stone_video* video) {
  return video && !video->frames.empty() ? static_cast<uint32_t>(video->frames.front()->img.side()) : 0;
}

const stone_image* stone_video_frame(const stone_video* video, size_t index) {
  if (!video || index >= video->frames.size()) return nullptr;
  return video->frames[index].get();
}

stone_status stone_video_read_dir(const char* dir, stone_video** out) {
  STONE_REQUIRE(dir);
  STONE_REQUIRE(out);
  return guarded([&] {
    auto v = std::make_unique<stone_video>();
    for (auto& f : stone::read_frame_directory(dir)) {
      v->frames.push_back(std::make_unique<stone_image>(stone_image{std::move(f)}));
    }
    *out = v.release();
  });
}

stone_status stone_video_write_dir(const stone_video* video, const char* dir, stone_image_format format) {
  STONE_REQUIRE(video);
  STONE_REQUIRE(dir);
  return guarded([&] {
    const auto fmt = format == STONE_FORMAT_AUTO ? stone::ImageFormat::RawF32 : to_format(format, dir);
    stone::write_frame_directory(frames_of(*video), dir, fmt);
  });
}

stone_status stone_video_add_noise(stone_video* video, double sigma, uint64_t seed) {
  STONE_REQUIRE(video);
  return guarded([&] {
    // One seed per frame so frames get independent noise.
    for (std::size_t f = 0; f < video->frames.size(); ++f) {
      video->frames[f]->img = stone::add_image_noise(video->frames[f]->img, sigma, seed + f);
    }
  });
}

stone_status stone_schedule_create(uint32_t side, uint64_t seed, stone_schedule** out) {
  STONE_REQUIRE(out);
  return guarded([&] { *out = new stone_schedule{stone::build_schedule(side, seed)}; });
}

void stone_schedule_destroy(stone_schedule* sched) { delete sched; }
size_t stone_schedule_length(const stone_schedule* sched) { return sched ? sched->sched.length() : 0; }
const uint32_t* stone_schedule_order(const stone_schedule* sched) {
  return sched ? sched->sched.order().data() : nullptr;
}

stone_status stone_acquire(const stone_video* frames, const stone_schedule* sched,
                           uint32_t measurements_per_frame, double noise_sigma, uint64_t noise_seed,
                           stone_stream** out) {
  STONE_REQUIRE(frames);
  STONE_REQUIRE(sched);
  STONE_REQUIRE(out);
  return guarded([&] {
    if (frames->frames.empty()) stone::fail(stone::ErrorCode::InvalidArgument, "no frames to acquire");
    const auto imgs = frames_of(*frames);
    *out = new stone_stream{
        stone::acquire(imgs, sched->sched, measurements_per_frame, noise_sigma, noise_seed)};
  });
}

void stone_stream_destroy(stone_stream* stream) { delete stream; }

stone_status stone_stream_info_get(const stone_stream* stream, stone_stream_info* info) {
  STONE_REQUIRE(stream);
  STONE_REQUIRE(info);
  const auto& s = stream->stream;
  info->side = static_cast<uint32_t>(s.side);
  info->measurements_per_frame = s.measurements_per_frame;
  info->frame_count = s.frame_count;
  info->schedule_seed = s.schedule_seed;
  info->record_count = s.records.size();
  info->noise_sigma = s.noise_sigma;
  info->noise_seed = s.noise_seed;
  info->first_position = s.records.empty() ? 0 : s.records.front().position;
  info->last_position = s.records.empty() ? 0 : s.records.back().position;
  return STONE_OK;
}

stone_status stone_stream_record(const stone_stream* stream, size_t index, stone_record* out) {
  STONE_REQUIRE(stream);
  STONE_REQUIRE(out);
  if (index >= stream->stream.records.size()) {
    return record(STONE_ERR_INVALID_ARGUMENT, "record index out of range");
  }
  const auto& r = stream->stream.records[index];
  *out = {r.position, r.row_index, r.value};
  return STONE_OK;
}

stone_status stone_stream_write(const stone_stream* stream, const char* path) {
  STONE_REQUIRE(stream);
  STONE_REQUIRE(path);
  return guarded([&] { stone::write_stream(stream->stream, path); });
}

stone_status stone_stream_read(const char* path, stone_stream** out) {
  STONE_REQUIRE(path);
  STONE_REQUIRE(out);
  return guarded([&] { *out = new stone_stream{stone::read_stream(path)}; });
}

stone_status stone_preview(const stone_stream* stream, uint64_t at_position, uint32_t n,
                           stone_image** out, stone_preview_info* info) {
  STONE_REQUIRE(stream);
  STONE_REQUIRE(out);
  return guarded([&] {
    const auto at = resolve_position(stream->stream, at_position);
    stone::PreviewImage pv = stone::preview_from_stream(stream->stream, at, n);
    if (info) {
      info->window_start = pv.window_start;
      info->window_count = pv.window_count;
      info->source_side = static_cast<uint32_t>(pv.source_side);
      info->bins_hit = static_cast<uint32_t>(pv.bins_hit);
    }
    *out = new stone_image{std::move(pv.image)};
  });
}

void stone_solver_config_default(stone_solver_config* cfg) {
  if (!cfg) return;
  const stone::SolverConfig d;
  cfg->mu = d.mu;
  cfg->tau = d.tau;
  cfg->sigma = d.sigma;
  cfg->max_iters = d.max_iters;
  cfg->tol = d.tol;
  cfg->adaptive = d.adaptive ? 1 : 0;
  cfg->projection = STONE_PROJECTION_ISOTROPIC;
  cfg->init = STONE_INIT_PREVIEW;
}

stone_status stone_reconstruct(const stone_stream* stream, uint32_t width, uint32_t stride,
                               const stone_solver_config* cfg, stone_recon** out) {
  STONE_REQUIRE(stream);
  STONE_REQUIRE(cfg);
  STONE_REQUIRE(out);
  return guarded([&] {
    const auto& s = stream->stream;
    const std::size_t w = width ? width : s.measurements_per_frame;
    const std::size_t st = stride ? stride : w;
    stone::SolverConfig config;
    config.mu = cfg->mu;
    config.tau = cfg->tau;
    config.sigma = cfg->sigma;
    config.max_iters = cfg->max_iters;
    config.tol = cfg->tol;
    config.adaptive = cfg->adaptive != 0;
    config.projection = cfg->projection == STONE_PROJECTION_LINF ? stone::DualProjection::Linf
                                                                 : stone::DualProjection::Isotropic;
    config.init = cfg->init == STONE_INIT_ZERO ? stone::InitMode::Zero : stone::InitMode::Preview;
    const auto meas = stone::segment_stream(s, w, st);
    auto recon = std::make_unique<stone_recon>(stone_recon{stone::solve_3dtv(meas, config), {}});
    for (auto& f : recon->result.volume.to_frames()) {
      recon->video.frames.push_back(std::make_unique<stone_image>(stone_image{std::move(f)}));
    }
    *out = recon.release();
  });
}

void stone_recon_destroy(stone_recon* recon) { delete recon; }
const stone_video* stone_recon_video(const stone_recon* recon) { return recon ? &recon->video : nullptr; }
uint64_t stone_recon_iterations(const stone_recon* recon) { return recon ? recon->result.iterations : 0; }
int stone_recon_converged(const stone_recon* recon) { return recon && recon->result.converged ? 1 : 0; }
size_t stone_recon_trace_length(const stone_recon* recon) { return recon ? recon->result.trace.size() : 0; }

stone_status stone_recon_trace_entry(const stone_recon* recon, size_t index, stone_trace_entry* out) {
  STONE_REQUIRE(recon);
  STONE_REQUIRE(out);
  if (index >= recon->result.trace.size()) return record(STONE_ERR_INVALID_ARGUMENT, "trace index out of range");
  const auto& t = recon->result.trace[index];
  *out = {t.iteration, t.objective, t.primal_residual, t.dual_residual, t.elapsed_seconds};
  return STONE_OK;
}

stone_status stone_recon_write_trace(const stone_recon* recon, const char* path) {
  STONE_REQUIRE(recon);
  STONE_REQUIRE(path);
  return guarded([&] { stone::write_file_atomic(path, stone::trace_to_csv(recon->result.trace)); });
}

stone_status stone_catalog_create(stone_catalog** out) {
  STONE_REQUIRE(out);
  return guarded([&] { *out = new stone_catalog{}; });
}

void stone_catalog_destroy(stone_catalog* catalog) { delete catalog; }

stone_status stone_catalog_add(stone_catalog* catalog, const char* name, const stone_image* image) {
  STONE_REQUIRE(catalog);
  STONE_REQUIRE(name);
  STONE_REQUIRE(image);
  return guarded([&] {
    if (std::strlen(name) >= sizeof(stone_match::template_name)) {
      stone::fail(stone::ErrorCode::InvalidArgument, "template name too long");
    }
    catalog->catalog.add(name, image->img);
  });
}

size_t stone_catalog_size(const stone_catalog* catalog) { return catalog ? catalog->catalog.size() : 0; }

stone_status stone_catalog_read_dir(const char* dir, stone_catalog** out) {
  STONE_REQUIRE(dir);
  STONE_REQUIRE(out);
  return guarded([&] {
    auto cat = std::make_unique<stone_catalog>();
    for (auto& [name, img] : stone::read_named_images(dir)) {
      if (name.size() >= sizeof(stone_match::template_name)) {
        stone::fail(stone::ErrorCode::InvalidArgument, "template name too long: " + name);
      }
      cat->catalog.add(name, std::move(img));
    }
    *out = cat.release();
  });
}

stone_status stone_classify(const stone_stream* stream, const stone_catalog* catalog, uint32_t n,
                            uint64_t at_position, stone_match* out) {
  STONE_REQUIRE(stream);
  STONE_REQUIRE(catalog);
  STONE_REQUIRE(out);
  return guarded([&] {
    const auto at = resolve_position(stream->stream, at_position);
    const stone::PreviewImage pv = stone::preview_from_stream(stream->stream, at, n);
    const stone::MatchResult m = stone::smashed_match(pv, catalog->catalog);
    std::memset(out->template_name, 0, sizeof out->template_name);
    std::memcpy(out->template_name, m.best_template.data(), m.best_template.size());
    out->dx = m.dx;
    out->dy = m.dy;
    out->score = m.score;
    out->preview_side = n;
  });
}

stone_status stone_selftest_run(stone_selftest_report** out) {
  STONE_REQUIRE(out);
  return guarded([&] { *out = new stone_selftest_report{stone::run_selftest()}; });
}

void stone_selftest_destroy(stone_selftest_report* report) { delete report; }
size_t stone_selftest_count(const stone_selftest_report* report) { return report ? report->checks.size() : 0; }

stone_status stone_selftest_check(const stone_selftest_report* report, size_t index, const char** name,
                                  int* passed, const char** detail) {
  STONE_REQUIRE(report);
  if (index >= report->checks.size()) return record(STONE_ERR_INVALID_ARGUMENT, "check index out of range");
  const auto& c = report->checks[index];
  if (name) *name = c.name.c_str();
  if (passed) *passed = c.passed ? 1 : 0;
  if (detail) *detail = c.detail.c_str();
  return STONE_OK;
}

}  // extern "C"
