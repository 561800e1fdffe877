#ifndef DOORWAY_RMT_H
#define DOORWAY_RMT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define DRM_FAMILY_REGULAR_BETA1 0

#define DRM_FAMILY_REGULAR_BETA2 1

#define DRM_FAMILY_GOE 2

#define DRM_FAMILY_GUE 3

#define DRM_BACKGROUND_REGULAR 0

#define DRM_BACKGROUND_GOE 1

#define DRM_BACKGROUND_GUE 2

#define DRM_INTERACTION_GAUSSIAN 0

#define DRM_INTERACTION_UNIFORM 1

#define DRM_INTERACTION_SEMICIRCLE 2

#define DRM_ROUTE_FIDELITY 0

#define DRM_ROUTE_MAX_OVERLAP 1

typedef enum DrmStatus {
  DRM_STATUS_OK = 0,
  DRM_STATUS_NULL_POINTER = 1,
  DRM_STATUS_INVALID_ARGUMENT = 2,
  DRM_STATUS_DOMAIN = 3,
  DRM_STATUS_NUMERIC = 4,
  DRM_STATUS_BUFFER_TOO_SMALL = 5,
  DRM_STATUS_PANIC = 6,
} DrmStatus;

// Closed-form distribution of one family at one coupling.
typedef struct DrmAnalytic DrmAnalytic;

// Ensemble parameters from which overlap samples are drawn.
typedef struct DrmSampler DrmSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *drm_version(void);

// Message of the last failed call on this thread, or "" after a success.
// The pointer stays valid until the next call on the same thread.
const char *drm_last_error(void);

// First-moment factor `⟨|V|⟩ / √⟨|V|²⟩` of an interaction law.
//
// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_a_factor(uint32_t interaction_kind, uint32_t beta_index, double *out);

// Hermite kernel `K_N(0, 0)`.
//
// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_kernel_at_zero(size_t n, double *out);

// Creates a closed-form distribution. Regular families take `a_beta` in
// (0, 1]; pass NaN to use the Gaussian value. Other families ignore it.
//
// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_analytic_new(uint32_t family_code,
                                double lambda,
                                double a_beta,
                                struct DrmAnalytic **out);

// # Safety
// `h` must be null or a live handle from this library, not used afterwards.
void drm_analytic_free(struct DrmAnalytic *h);

// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_analytic_pdf(const struct DrmAnalytic *h, double c, double *out);

// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_analytic_cdf(const struct DrmAnalytic *h, double c, double *out);

// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_analytic_quantile(const struct DrmAnalytic *h, double p, double *out);

// KS distance between `n` samples in [0, 1] and the distribution.
//
// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_analytic_ks(const struct DrmAnalytic *h,
                               const double *samples,
                               size_t n,
                               double *out);

// Two-sample KS distance between samples in [0, 1].
//
// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_ks_two_sample(const double *a,
                                 size_t n_a,
                                 const double *b,
                                 size_t n_b,
                                 double *out);

// Creates a sampler with `w = 1` and the coupling set from `lambda`.
//
// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_sampler_new(uint32_t background_kind,
                               size_t n_levels,
                               uint32_t interaction_kind,
                               uint32_t beta_index,
                               double lambda,
                               uint64_t seed,
                               struct DrmSampler **out);

// # Safety
// `h` must be null or a live handle from this library, not used afterwards.
void drm_sampler_free(struct DrmSampler *h);

// Fills `out[0..n]` with overlap samples `0..n` of the sampler's stream.
// Identical arguments give identical values.
//
// # Safety
// Pointers must be null or valid for the documented reads and writes;
// handles must be live.
enum DrmStatus drm_sampler_draw(const struct DrmSampler *h,
                                uint32_t route_code,
                                size_t n,
                                double *out,
                                size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DOORWAY_RMT_H */
