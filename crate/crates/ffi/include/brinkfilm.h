/* C interface of the brinkfilm homogenized thin-film solvers. */

#ifndef BRINKFILM_H
#define BRINKFILM_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status code of a fallible call.
 */
typedef enum BfStatus {
  BF_STATUS_OK = 0,
  /*
   A pointer argument was null or a value argument invalid.
   */
  BF_STATUS_INVALID_ARGUMENT = 1,
  /*
   A solver failed to converge or a precondition was violated.
   */
  BF_STATUS_SOLVER_FAILURE = 2,
  /*
   I/O or configuration parsing failed.
   */
  BF_STATUS_CONFIG_ERROR = 3,
  /*
   A panic was caught at the boundary.
   */
  BF_STATUS_INTERNAL = 4,
} BfStatus;

/*
 Opaque physical-parameter handle.
 */
typedef struct BfParams BfParams;

/*
 Opaque roughness-profile handle.
 */
typedef struct BfProfile BfProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copy the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length in bytes.

 # Safety
 `buf` must point to `len` writable bytes, or be null (then only the
 length is returned).
 */
size_t bf_last_error_message(char *buf, size_t len);

/*
 Build a parameter set; fails if a constant that must be positive is not.

 # Safety
 `out` must be a valid pointer to a handle slot.
 */
enum BfStatus bf_params_new(double mu,
                            double mu_eff,
                            double permeability,
                            double conductivity,
                            double heat_flux,
                            struct BfParams **out);

/*
 Brinkman parameter `M = sqrt(mu / (K mu_eff))`; NaN for a null handle.

 # Safety
 `params` must be a live handle from [`bf_params_new`] or null.
 */
double bf_params_m(const struct BfParams *params);

/*
 # Safety
 `params` must be a handle from [`bf_params_new`] (or null, a no-op);
 it must not be used afterwards.
 */
void bf_params_free(struct BfParams *params);

/*
 Constant roughness profile `h(z') = height`.

 # Safety
 `out` must be a valid pointer to a handle slot.
 */
enum BfStatus bf_profile_constant_new(double height, struct BfProfile **out);

/*
 Product sinusoid `h = mean + amplitude cos(2 pi k1 z1) cos(2 pi k2 z2)`.

 # Safety
 `out` must be a valid pointer to a handle slot.
 */
enum BfStatus bf_profile_sinusoidal_new(double mean,
                                        double amplitude,
                                        uint32_t k1,
                                        uint32_t k2,
                                        struct BfProfile **out);

/*
 Sampled profile: `heights[j * n1 + i]` on the cell-center grid of `Z'`,
 interpolated bilinearly with periodic wrapping.

 # Safety
 `heights` must point to `n1 * n2` doubles; `out` must be valid.
 */
enum BfStatus bf_profile_sampled_new(const double *heights,
                                     size_t n1,
                                     size_t n2,
                                     struct BfProfile **out);

/*
 Evaluate the profile with periodic wrapping; NaN for a null handle.

 # Safety
 `profile` must be a live profile handle or null.
 */
double bf_profile_eval(const struct BfProfile *profile, double z1, double z2);

/*
 # Safety
 `profile` must be a handle from a `bf_profile_*_new` call (or null);
 it must not be used afterwards.
 */
void bf_profile_free(struct BfProfile *profile);

/*
 Flow factor `phi_M(h) = h - (2/M) tanh(M h / 2)`; NaN for invalid input.
 */
double bf_flow_factor(double m, double h);

/*
 Subcritical effective tensor on an `n x n` periodic cell grid.
 `out_tensor` receives row-major entries `[a11, a12, a21, a22]`,
 `out_residual` (optional) the worst corrector flux-divergence.

 # Safety
 Handles must be live; `out_tensor` must point to 4 doubles and
 `out_residual` to one double or be null.
 */
enum BfStatus bf_subcritical_tensor(const struct BfProfile *profile,
                                    const struct BfParams *params,
                                    size_t n,
                                    double tol,
                                    double *out_tensor,
                                    double *out_residual);

/*
 Critical (3D) effective tensor on an `n1 x n2 x n3` staggered grid over
 the penalized box `Z' x (0, h_max)`; entries as in
 [`bf_subcritical_tensor`], residual = worst fluid-cell divergence.

 # Safety
 Same contracts as [`bf_subcritical_tensor`].
 */
enum BfStatus bf_critical_tensor(const struct BfProfile *profile,
                                 const struct BfParams *params,
                                 size_t n1,
                                 size_t n2,
                                 size_t n3,
                                 double tol,
                                 double *out_tensor,
                                 double *out_residual);

/*
 Run the full pipeline from a JSON configuration string, writing the
 standard output files into `out_dir`.

 # Safety
 `config_json` and `out_dir` must be NUL-terminated UTF-8 strings.
 */
enum BfStatus bf_run_json(const char *config_json, const char *out_dir);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BRINKFILM_H */
