/*
 * C interface to the stone compressive-imaging library.
 *
 * Every object is an opaque handle created by a stone_*_create/read/...
 * call and released with the matching stone_*_destroy. Fallible calls return
 * a stone_status; on failure stone_last_error() describes the cause for the
 * calling thread until its next failing call.
 */
#ifndef STONE_STONE_H
#define STONE_STONE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(STONE_BUILDING_LIBRARY)
#    define STONE_API __declspec(dllexport)
#  else
#    define STONE_API __declspec(dllimport)
#  endif
#else
#  define STONE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stone_status {
  STONE_OK = 0,
  STONE_ERR_INVALID_DIMENSION = 1,
  STONE_ERR_INVALID_WINDOW = 2,
  STONE_ERR_INCOMPLETE_PREVIEW = 3,
  STONE_ERR_RESOURCE_LIMIT = 4,
  STONE_ERR_DIVERGENCE = 5,
  STONE_ERR_NOT_APPLICABLE = 6,
  STONE_ERR_IO = 7,
  STONE_ERR_FORMAT = 8,
  STONE_ERR_INVALID_ARGUMENT = 9,
  STONE_ERR_NULL_ARGUMENT = 10,
  STONE_ERR_INTERNAL = 99
} stone_status;

STONE_API const char* stone_status_name(stone_status status);
STONE_API const char* stone_last_error(void);
STONE_API const char* stone_version(void);

/* ---- images ---------------------------------------------------------- */

typedef struct stone_image stone_image;

typedef enum stone_image_format {
  STONE_FORMAT_AUTO = 0, /* from the file extension: .pgm or .f32 */
  STONE_FORMAT_PGM8 = 1,
  STONE_FORMAT_PGM16 = 2,
  STONE_FORMAT_RAW_F32 = 3
} stone_image_format;

/* `pixels` is row-major side*side, or NULL for a zero image. */
STONE_API stone_status stone_image_create(uint32_t side, const double* pixels, stone_image** out);
STONE_API void stone_image_destroy(stone_image* image);
STONE_API uint32_t stone_image_side(const stone_image* image);
STONE_API const double* stone_image_pixels(const stone_image* image);
STONE_API stone_status stone_image_read(const char* path, stone_image** out);
STONE_API stone_status stone_image_write(const stone_image* image, const char* path,
                                         stone_image_format format);

/* ---- transform -------------------------------------------------------- */

typedef struct stone_vector stone_vector;

STONE_API void stone_vector_destroy(stone_vector* vec);
STONE_API size_t stone_vector_length(const stone_vector* vec);
STONE_API const double* stone_vector_data(const stone_vector* vec);
/* Side of the image the vector belongs to (sqrt of its length). */
STONE_API uint32_t stone_vector_side(const stone_vector* vec);

/* In place; length must be a power of four. */
STONE_API stone_status stone_transform_inplace(double* data, size_t length);
/* Nested-dissection vectorisation followed by the fast transform. */
STONE_API stone_status stone_image_forward(const stone_image* image, stone_vector** out);
/* Fast transform followed by devectorisation. */
STONE_API stone_status stone_image_inverse(const double* coef, size_t length, stone_image** out);
STONE_API stone_status stone_coefficients_write(const double* coef, size_t length, const char* path);
STONE_API stone_status stone_coefficients_read(const char* path, stone_vector** out);

/* ---- video ------------------------------------------------------------ */

typedef struct stone_video stone_video;

STONE_API stone_status stone_video_create(stone_video** out);
STONE_API void stone_video_destroy(stone_video* video);
STONE_API stone_status stone_video_append(stone_video* video, const stone_image* frame);
STONE_API size_t stone_video_frame_count(const stone_video* video);
STONE_API uint32_t stone_video_side(const stone_video* video);
/* Borrowed; valid until the video is modified or destroyed. */
STONE_API const stone_image* stone_video_frame(const stone_video* video, size_t index);
STONE_API stone_status stone_video_read_dir(const char* dir, stone_video** out);
STONE_API stone_status stone_video_write_dir(const stone_video* video, const char* dir,
                                             stone_image_format format);
/* Image-domain white Gaussian noise, in place. */
STONE_API stone_status stone_video_add_noise(stone_video* video, double sigma, uint64_t seed);

/* ---- schedule and acquisition ----------------------------------------- */

typedef struct stone_schedule stone_schedule;

STONE_API stone_status stone_schedule_create(uint32_t side, uint64_t seed, stone_schedule** out);
STONE_API void stone_schedule_destroy(stone_schedule* sched);
STONE_API size_t stone_schedule_length(const stone_schedule* sched);
STONE_API const uint32_t* stone_schedule_order(const stone_schedule* sched);

typedef struct stone_stream stone_stream;

typedef struct stone_stream_info {
  uint32_t side;
  uint32_t measurements_per_frame;
  uint32_t frame_count;
  uint64_t schedule_seed;
  uint64_t record_count;
  double noise_sigma;
  uint64_t noise_seed;
  uint64_t first_position;
  uint64_t last_position;
} stone_stream_info;

typedef struct stone_record {
  uint64_t position;
  uint32_t row_index;
  double value;
} stone_record;

STONE_API stone_status stone_acquire(const stone_video* frames, const stone_schedule* sched,
                                     uint32_t measurements_per_frame, double noise_sigma,
                                     uint64_t noise_seed, stone_stream** out);
STONE_API void stone_stream_destroy(stone_stream* stream);
STONE_API stone_status stone_stream_info_get(const stone_stream* stream, stone_stream_info* info);
STONE_API stone_status stone_stream_record(const stone_stream* stream, size_t index,
                                           stone_record* out);
STONE_API stone_status stone_stream_write(const stone_stream* stream, const char* path);
/* Validates magic, version and schedule consistency. */
STONE_API stone_status stone_stream_read(const char* path, stone_stream** out);

/* ---- preview ---------------------------------------------------------- */

/* Pass as at_position to use the most recent record. */
#define STONE_LATEST_POSITION UINT64_MAX

typedef struct stone_preview_info {
  uint64_t window_start;
  uint64_t window_count;
  uint32_t source_side;
  uint32_t bins_hit;
} stone_preview_info;

/* `info` may be NULL. */
STONE_API stone_status stone_preview(const stone_stream* stream, uint64_t at_position, uint32_t n,
                                     stone_image** out, stone_preview_info* info);

/* ---- reconstruction --------------------------------------------------- */

typedef enum stone_projection {
  STONE_PROJECTION_ISOTROPIC = 0,
  STONE_PROJECTION_LINF = 1
} stone_projection;

typedef enum stone_init {
  STONE_INIT_PREVIEW = 0,
  STONE_INIT_ZERO = 1
} stone_init;

typedef struct stone_solver_config {
  double mu;
  double tau;
  double sigma;
  uint64_t max_iters;
  double tol;
  int adaptive;
  stone_projection projection;
  stone_init init;
} stone_solver_config;

STONE_API void stone_solver_config_default(stone_solver_config* cfg);

typedef struct stone_recon stone_recon;

typedef struct stone_trace_entry {
  uint64_t iteration;
  double objective;
  double primal_residual;
  double dual_residual;
  double elapsed_seconds;
} stone_trace_entry;

/* width 0 means measurements_per_frame; stride 0 means width. */
STONE_API stone_status stone_reconstruct(const stone_stream* stream, uint32_t width, uint32_t stride,
                                         const stone_solver_config* cfg, stone_recon** out);
STONE_API void stone_recon_destroy(stone_recon* recon);
/* Borrowed; owned by the result. */
STONE_API const stone_video* stone_recon_video(const stone_recon* recon);
STONE_API uint64_t stone_recon_iterations(const stone_recon* recon);
STONE_API int stone_recon_converged(const stone_recon* recon);
STONE_API size_t stone_recon_trace_length(const stone_recon* recon);
STONE_API stone_status stone_recon_trace_entry(const stone_recon* recon, size_t index,
                                               stone_trace_entry* out);
/* CSV: iteration,objective,primal_residual,dual_residual,elapsed_seconds */
STONE_API stone_status stone_recon_write_trace(const stone_recon* recon, const char* path);

/* ---- smashed filter --------------------------------------------------- */

typedef struct stone_catalog stone_catalog;

STONE_API stone_status stone_catalog_create(stone_catalog** out);
STONE_API void stone_catalog_destroy(stone_catalog* catalog);
STONE_API stone_status stone_catalog_add(stone_catalog* catalog, const char* name,
                                         const stone_image* image);
STONE_API size_t stone_catalog_size(const stone_catalog* catalog);
STONE_API stone_status stone_catalog_read_dir(const char* dir, stone_catalog** out);

typedef struct stone_match {
  char template_name[256];
  int64_t dx;
  int64_t dy;
  double score;
  uint32_t preview_side;
} stone_match;

/* Preview at side n from the stream window ending at at_position, then the
 * best template and cyclic shift. */
STONE_API stone_status stone_classify(const stone_stream* stream, const stone_catalog* catalog,
                                      uint32_t n, uint64_t at_position, stone_match* out);

/* ---- self test -------------------------------------------------------- */

typedef struct stone_selftest_report stone_selftest_report;

STONE_API stone_status stone_selftest_run(stone_selftest_report** out);
STONE_API void stone_selftest_destroy(stone_selftest_report* report);
STONE_API size_t stone_selftest_count(const stone_selftest_report* report);
STONE_API stone_status stone_selftest_check(const stone_selftest_report* report, size_t index,
                                            const char** name, int* passed, const char** detail);

#ifdef __cplusplus
}
#endif

#endif /* STONE_STONE_H */
