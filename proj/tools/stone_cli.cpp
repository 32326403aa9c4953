// stone: command-line front end over the C interface.
#include "stone/stone.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Thrown to unwind with a status already reported.
struct Failure {
  int exit_code;
};

int exit_code_for(stone_status status) {
  switch (status) {
    case STONE_OK: return kExitOk;
    case STONE_ERR_INVALID_DIMENSION:
    case STONE_ERR_INVALID_WINDOW:
    case STONE_ERR_NOT_APPLICABLE:
    case STONE_ERR_FORMAT:
    case STONE_ERR_INVALID_ARGUMENT:
    case STONE_ERR_NULL_ARGUMENT: return kExitValidation;
    default: return kExitRuntime;
  }
}

void check(stone_status status, const std::string& context) {
  if (status == STONE_OK) return;
  std::fprintf(stderr, "stone: %s: %s (%s)\n", context.c_str(), stone_last_error(),
               stone_status_name(status));
  throw Failure{exit_code_for(status)};
}

[[noreturn]] void invalid(const std::string& flag, const std::string& why) {
  std::fprintf(stderr, "stone: %s: %s\n", flag.c_str(), why.c_str());
  throw Failure{kExitValidation};
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using ImagePtr = std::unique_ptr<stone_image, Deleter<stone_image, stone_image_destroy>>;
using VectorPtr = std::unique_ptr<stone_vector, Deleter<stone_vector, stone_vector_destroy>>;
using VideoPtr = std::unique_ptr<stone_video, Deleter<stone_video, stone_video_destroy>>;
using SchedulePtr = std::unique_ptr<stone_schedule, Deleter<stone_schedule, stone_schedule_destroy>>;
using StreamPtr = std::unique_ptr<stone_stream, Deleter<stone_stream, stone_stream_destroy>>;
using ReconPtr = std::unique_ptr<stone_recon, Deleter<stone_recon, stone_recon_destroy>>;
using CatalogPtr = std::unique_ptr<stone_catalog, Deleter<stone_catalog, stone_catalog_destroy>>;
using ReportPtr =
    std::unique_ptr<stone_selftest_report, Deleter<stone_selftest_report, stone_selftest_destroy>>;

const CLI::Validator kPowerOfTwo(
    [](std::string& s) -> std::string {
      unsigned long long v = 0;
      try {
        v = std::stoull(s);
      } catch (...) {
        return "not an integer: " + s;
      }
      if (v == 0 || (v & (v - 1)) != 0) return "must be a power of two, got " + s;
      return {};
    },
    "POW2");

stone_image_format parse_format(const std::string& s) {
  if (s == "auto") return STONE_FORMAT_AUTO;
  if (s == "pgm8") return STONE_FORMAT_PGM8;
  if (s == "pgm16") return STONE_FORMAT_PGM16;
  return STONE_FORMAT_RAW_F32;
}

const std::map<std::string, std::string> kFormats{
    {"auto", "auto"}, {"pgm8", "pgm8"}, {"pgm16", "pgm16"}, {"f32", "f32"}};

// Centralised defaults; --print-config shows them.
struct Defaults {
  std::uint64_t schedule_seed = 1;
  std::uint64_t noise_seed = 2;
  std::uint32_t preview_side = 16;
  stone_solver_config solver{};
  Defaults() { stone_solver_config_default(&solver); }
};

json defaults_json(const Defaults& d) {
  return {
      {"version", stone_version()},
      {"acquire", {{"seed", d.schedule_seed}, {"noise_seed", d.noise_seed}, {"noise", 0.0}, {"image_noise", 0.0}}},
      {"preview", {{"n", d.preview_side}, {"at", "latest"}}},
      {"reconstruct",
       {{"mu", d.solver.mu},
        {"tau", d.solver.tau},
        {"sigma", d.solver.sigma},
        {"max_iters", d.solver.max_iters},
        {"tol", d.solver.tol},
        {"adaptive", d.solver.adaptive != 0},
        {"projection", "isotropic"},
        {"init", "preview"},
        {"width", "measurements_per_frame"},
        {"stride", "width"}}},
      {"classify", {{"n", d.preview_side}, {"at", "latest"}}},
  };
}

std::uint64_t parse_position(const std::string& s) {
  if (s == "latest") return STONE_LATEST_POSITION;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size()) return v;
  } catch (...) {
  }
  invalid("--at", "expected a stream position or 'latest', got '" + s + "'");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os << text;
  if (!os) invalid("--out", "cannot write " + path);
}

}  // namespace

int main(int argc, char** argv) {
  Defaults defaults;
  CLI::App app{"Compressive imaging with the STOne transform"};
  app.require_subcommand(0, 1);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print default parameters as JSON and exit");

  // transform
  auto* transform = app.add_subcommand("transform", "Forward or inverse transform of one image");
  std::string tr_in, tr_out, tr_format = "auto";
  bool tr_inverse = false;
  transform->add_option("-i,--input", tr_in, "Image (forward) or coefficient file (inverse)")->required();
  transform->add_option("-o,--output", tr_out, "Coefficient file (forward) or image (inverse)")->required();
  transform->add_flag("--inverse", tr_inverse, "Coefficients to image");
  transform->add_option("--format", tr_format, "Output image format for --inverse")
      ->transform(CLI::CheckedTransformer(kFormats));

  // acquire
  auto* acquire = app.add_subcommand("acquire", "Simulate single-pixel acquisition of a frame directory");
  std::string aq_frames, aq_out;
  std::uint64_t aq_seed = defaults.schedule_seed, aq_noise_seed = defaults.noise_seed;
  std::uint32_t aq_mpf = 0;
  double aq_rate = 0.0, aq_fps = 0.0, aq_noise = 0.0, aq_image_noise = 0.0;
  acquire->add_option("--frames", aq_frames, "Directory of numbered .pgm/.f32 frames")->required();
  acquire->add_option("-o,--out", aq_out, "Output stream file")->required();
  acquire->add_option("--seed", aq_seed, "Schedule seed");
  auto* mpf_opt = acquire->add_option("--mpf", aq_mpf, "Measurements per frame")->check(CLI::PositiveNumber);
  auto* rate_opt = acquire->add_option("--rate", aq_rate, "Measurement rate in Hz")->check(CLI::PositiveNumber);
  auto* fps_opt = acquire->add_option("--fps", aq_fps, "Source frame rate")->check(CLI::PositiveNumber);
  rate_opt->needs(fps_opt);
  fps_opt->needs(rate_opt);
  mpf_opt->excludes(rate_opt);
  acquire->add_option("--noise", aq_noise, "Measurement noise standard deviation")->check(CLI::NonNegativeNumber);
  acquire->add_option("--image-noise", aq_image_noise, "Image-domain noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  acquire->add_option("--noise-seed", aq_noise_seed, "Noise seed");

  // preview
  auto* preview = app.add_subcommand("preview", "Preview from the most recent n^2 measurements");
  std::string pv_stream, pv_out, pv_at = "latest", pv_format = "auto";
  std::uint32_t pv_n = defaults.preview_side;
  preview->add_option("-s,--stream", pv_stream, "Stream file")->required();
  preview->add_option("-n,--n", pv_n, "Preview side")->check(kPowerOfTwo);
  preview->add_option("--at", pv_at, "Stream position of the newest record, or 'latest'");
  preview->add_option("-o,--out", pv_out, "Output image")->required();
  preview->add_option("--format", pv_format, "Output format")->transform(CLI::CheckedTransformer(kFormats));

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "3-D TV reconstruction of a stream");
  std::string rc_stream, rc_out, rc_trace, rc_projection = "isotropic", rc_init = "preview", rc_format = "f32";
  std::uint32_t rc_width = 0, rc_stride = 0;
  stone_solver_config cfg = defaults.solver;
  bool rc_adaptive = false;
  recon->add_option("-s,--stream", rc_stream, "Stream file")->required();
  recon->add_option("-o,--out", rc_out, "Output frame directory")->required();
  recon->add_option("--trace", rc_trace, "Diagnostics CSV (default <out>/trace.csv)");
  recon->add_option("--width", rc_width, "Records per frame (default measurements_per_frame)");
  recon->add_option("--stride", rc_stride, "Records between frame starts (default width)");
  recon->add_option("--mu", cfg.mu, "Data fidelity weight")->check(CLI::PositiveNumber);
  recon->add_option("--tau", cfg.tau, "Primal step")->check(CLI::PositiveNumber);
  recon->add_option("--sigma", cfg.sigma, "Dual step")->check(CLI::PositiveNumber);
  recon->add_option("--max-iters", cfg.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  recon->add_option("--tol", cfg.tol, "Residual tolerance")->check(CLI::NonNegativeNumber);
  recon->add_flag("--adaptive", rc_adaptive, "Residual-balancing step adaptation");
  recon->add_option("--projection", rc_projection, "Dual projection")
      ->check(CLI::IsMember({"isotropic", "linf"}));
  recon->add_option("--init", rc_init, "Starting point")->check(CLI::IsMember({"preview", "zero"}));
  recon->add_option("--format", rc_format, "Frame format")->transform(CLI::CheckedTransformer(kFormats));

  // classify
  auto* classify = app.add_subcommand("classify", "Smashed-filter classification of a preview");
  std::string cl_stream, cl_catalog, cl_at = "latest", cl_out;
  std::uint32_t cl_n = defaults.preview_side;
  classify->add_option("-s,--stream", cl_stream, "Stream file")->required();
  classify->add_option("-c,--catalog", cl_catalog, "Directory of template images")->required();
  classify->add_option("-n,--n", cl_n, "Preview side")->check(kPowerOfTwo);
  classify->add_option("--at", cl_at, "Stream position of the newest record, or 'latest'");
  classify->add_option("-o,--out", cl_out, "JSON output file (default stdout)");

  auto* selftest = app.add_subcommand("selftest", "Run the fast invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (print_config) {
      std::cout << defaults_json(defaults).dump(2) << "\n";
      return kExitOk;
    }

    if (*transform) {
      if (!tr_inverse) {
        stone_image* raw = nullptr;
        check(stone_image_read(tr_in.c_str(), &raw), "reading " + tr_in);
        ImagePtr img(raw);
        stone_vector* vraw = nullptr;
        check(stone_image_forward(img.get(), &vraw), "transform");
        VectorPtr vec(vraw);
        check(stone_coefficients_write(stone_vector_data(vec.get()), stone_vector_length(vec.get()),
                                       tr_out.c_str()),
              "writing " + tr_out);
      } else {
        stone_vector* vraw = nullptr;
        check(stone_coefficients_read(tr_in.c_str(), &vraw), "reading " + tr_in);
        VectorPtr vec(vraw);
        stone_image* raw = nullptr;
        check(stone_image_inverse(stone_vector_data(vec.get()), stone_vector_length(vec.get()), &raw),
              "inverse transform");
        ImagePtr img(raw);
        check(stone_image_write(img.get(), tr_out.c_str(), parse_format(tr_format)), "writing " + tr_out);
      }
      return kExitOk;
    }

    if (*acquire) {
      std::uint32_t mpf = aq_mpf;
      if (*rate_opt) {
        const double ratio = aq_rate / aq_fps;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
          invalid("--rate", "rate / fps must be a positive integer, got " + std::to_string(ratio));
        }
        mpf = static_cast<std::uint32_t>(std::llround(ratio));
      }
      if (mpf == 0) invalid("--mpf", "give --mpf or both --rate and --fps");
      stone_video* vraw = nullptr;
      check(stone_video_read_dir(aq_frames.c_str(), &vraw), "reading " + aq_frames);
      VideoPtr video(vraw);
      if (aq_image_noise > 0.0) check(stone_video_add_noise(video.get(), aq_image_noise, aq_noise_seed), "--image-noise");
      stone_schedule* sraw = nullptr;
      check(stone_schedule_create(stone_video_side(video.get()), aq_seed, &sraw), "schedule");
      SchedulePtr sched(sraw);
      stone_stream* straw = nullptr;
      check(stone_acquire(video.get(), sched.get(), mpf, aq_noise, aq_noise_seed, &straw), "acquire");
      StreamPtr stream(straw);
      check(stone_stream_write(stream.get(), aq_out.c_str()), "writing " + aq_out);
      stone_stream_info info{};
      check(stone_stream_info_get(stream.get(), &info), "stream info");
      std::fprintf(stderr, "side %u, %u frames, %u measurements/frame, %llu records\n", info.side,
                   info.frame_count, info.measurements_per_frame,
                   static_cast<unsigned long long>(info.record_count));
      return kExitOk;
    }

    if (*preview) {
      const auto at = parse_position(pv_at);
      stone_stream* straw = nullptr;
      check(stone_stream_read(pv_stream.c_str(), &straw), "reading " + pv_stream);
      StreamPtr stream(straw);
      stone_image* raw = nullptr;
      stone_preview_info info{};
      check(stone_preview(stream.get(), at, pv_n, &raw, &info), "preview");
      ImagePtr img(raw);
      check(stone_image_write(img.get(), pv_out.c_str(), parse_format(pv_format)), "writing " + pv_out);
      std::fprintf(stderr, "preview %ux%u from records [%llu, %llu]\n", pv_n, pv_n,
                   static_cast<unsigned long long>(info.window_start),
                   static_cast<unsigned long long>(info.window_start + info.window_count - 1));
      return kExitOk;
    }

    if (*recon) {
      cfg.adaptive = rc_adaptive ? 1 : 0;
      cfg.projection = rc_projection == "linf" ? STONE_PROJECTION_LINF : STONE_PROJECTION_ISOTROPIC;
      cfg.init = rc_init == "zero" ? STONE_INIT_ZERO : STONE_INIT_PREVIEW;
      stone_stream* straw = nullptr;
      check(stone_stream_read(rc_stream.c_str(), &straw), "reading " + rc_stream);
      StreamPtr stream(straw);
      stone_recon* rraw = nullptr;
      check(stone_reconstruct(stream.get(), rc_width, rc_stride, &cfg, &rraw), "reconstruct");
      ReconPtr result(rraw);
      const auto fmt = parse_format(rc_format);
      check(stone_video_write_dir(stone_recon_video(result.get()), rc_out.c_str(),
                                  fmt == STONE_FORMAT_AUTO ? STONE_FORMAT_RAW_F32 : fmt),
            "writing " + rc_out);
      const std::string trace = rc_trace.empty() ? rc_out + "/trace.csv" : rc_trace;
      check(stone_recon_write_trace(result.get(), trace.c_str()), "writing " + trace);
      std::fprintf(stderr, "%zu frames, %llu iterations, %s\n",
                   stone_video_frame_count(stone_recon_video(result.get())),
                   static_cast<unsigned long long>(stone_recon_iterations(result.get())),
                   stone_recon_converged(result.get()) ? "converged" : "iteration cap reached");
      return kExitOk;
    }

    if (*classify) {
      const auto at = parse_position(cl_at);
      stone_stream* straw = nullptr;
      check(stone_stream_read(cl_stream.c_str(), &straw), "reading " + cl_stream);
      StreamPtr stream(straw);
      stone_catalog* craw = nullptr;
      check(stone_catalog_read_dir(cl_catalog.c_str(), &craw), "reading " + cl_catalog);
      CatalogPtr catalog(craw);
      stone_match match{};
      check(stone_classify(stream.get(), catalog.get(), cl_n, at, &match), "classify");
      const json out{{"template", match.template_name},
                     {"dx", match.dx},
                     {"dy", match.dy},
                     {"score", match.score},
                     {"n", match.preview_side}};
      write_text(cl_out, out.dump() + "\n");
      return kExitOk;
    }

    if (*selftest) {
      stone_selftest_report* rraw = nullptr;
      check(stone_selftest_run(&rraw), "selftest");
      ReportPtr report(rraw);
      bool all = true;
      for (std::size_t i = 0; i < stone_selftest_count(report.get()); ++i) {
        const char* name = nullptr;
        const char* detail = nullptr;
        int passed = 0;
        check(stone_selftest_check(report.get(), i, &name, &passed, &detail), "selftest");
        std::printf("%-20s %s  %s\n", name, passed ? "PASS" : "FAIL", detail);
        all = all && passed;
      }
      return all ? kExitOk : kExitRuntime;
    }

    std::cout << app.help();
    return kExitValidation;
  } catch (const Failure& f) {
    return f.exit_code;
  }
}
