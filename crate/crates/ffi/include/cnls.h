#ifndef CNLS_H
#define CNLS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum CnlsFamily {
  CNLS_FAMILY_SCALED_GROUND = 0,
  CNLS_FAMILY_GAUSSIAN = 1,
  CNLS_FAMILY_BUMP = 2,
} CnlsFamily;

typedef enum CnlsRegion {
  CNLS_REGION_SCATTER_SUB = 0,
  CNLS_REGION_BLOWUP_SUB = 1,
  CNLS_REGION_SCATTER_THRESHOLD = 2,
  CNLS_REGION_BLOWUP_THRESHOLD = 3,
  CNLS_REGION_GROUND_STATE_ORBIT = 4,
  CNLS_REGION_ABOVE_THRESHOLD = 5,
} CnlsRegion;

typedef enum CnlsStatus {
  CNLS_STATUS_OK = 0,
  CNLS_STATUS_NULL_POINTER = 1,
  CNLS_STATUS_INVALID_ARGUMENT = 2,
  CNLS_STATUS_INVALID_DIMENSION = 3,
  CNLS_STATUS_BELOW_HARDY = 4,
  CNLS_STATUS_INVALID_GRID = 5,
  CNLS_STATUS_POHOZAEV = 6,
  CNLS_STATUS_NON_FINITE = 7,
  CNLS_STATUS_NUMERICAL = 8,
  CNLS_STATUS_PANIC = 9,
} CnlsStatus;

typedef enum CnlsTermination {
  CNLS_TERMINATION_COMPLETED = 0,
  CNLS_TERMINATION_BLOWUP_DETECTED = 1,
  CNLS_TERMINATION_CONSERVATION_FAILURE = 2,
} CnlsTermination;

/**
 * Parameters, grid and ground state for one `(d, a)`.
 */
typedef struct CnlsBundle CnlsBundle;

/**
 * A complex radial field on the grid of the bundle it was made from.
 */
typedef struct CnlsField CnlsField;

/**
 * Ground-state constants of a bundle.
 */
typedef struct CnlsGroundState {
  uint32_t d;
  double a;
  double beta;
  double sigma;
  double kinetic_sq;
  double crit_mass;
  double cgn;
  double m_a;
  double pohozaev_residual;
} CnlsGroundState;

typedef struct CnlsVerdict {
  enum CnlsRegion region;
  double energy_margin;
  double kinetic_margin;
  double mass;
  double e_a;
  double kinetic_sq;
  double k_a;
} CnlsVerdict;

typedef struct CnlsRunSummary {
  enum CnlsTermination termination;
  double t_final;
  /**
   * NaN unless the run blew up
   */
  double t_star;
  size_t steps;
  size_t rejected_steps;
  double mass_drift;
  double e_a_drift;
  double kinetic_max;
} CnlsRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *cnls_last_error_message(void);

void cnls_clear_error(void);

/**
 * Builds `W_a` on a uniform grid of `n` nodes up to `r_max` and checks the
 * Pohozaev identity.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum CnlsStatus cnls_bundle_new(uint32_t d,
                                double a,
                                double r_max,
                                size_t n,
                                struct CnlsBundle **out_bundle);

/**
 * # Safety
 * `b` must be null or a handle from [`cnls_bundle_new`] not yet freed.
 */
void cnls_bundle_free(struct CnlsBundle *b);

/**
 * # Safety
 * `b` must be a live bundle handle and `info` writable.
 */
enum CnlsStatus cnls_bundle_info(const struct CnlsBundle *b, struct CnlsGroundState *info);

/**
 * Number of grid nodes, 0 for a null handle.
 *
 * # Safety
 * `b` must be null or a live bundle handle.
 */
size_t cnls_bundle_len(const struct CnlsBundle *b);

/**
 * Copies the node radii into `r[0..len]`; `len` must equal the grid size.
 *
 * # Safety
 * `b` must be a live bundle handle and `r` valid for `len` writes.
 */
enum CnlsStatus cnls_bundle_nodes(const struct CnlsBundle *b, double *r, size_t len);

/**
 * Field from node values. `im` may be null for real data.
 *
 * # Safety
 * `b` must be a live bundle handle, `re` (and `im` unless null) valid for
 * `len` reads, and `out_field` writable.
 */
enum CnlsStatus cnls_field_from_values(const struct CnlsBundle *b,
                                       const double *re,
                                       const double *im,
                                       size_t len,
                                       struct CnlsField **out_field);

/**
 * `scale_H1inv(c * base, s)` for the chosen base profile, optionally times
 * a smooth cutoff between `window_in` and `window_out`. Pass NaN for both
 * to skip the cutoff.
 *
 * # Safety
 * `b` must be a live bundle handle and `out_field` writable.
 */
enum CnlsStatus cnls_field_datum(const struct CnlsBundle *b,
                                 enum CnlsFamily family,
                                 double c,
                                 double s,
                                 double window_in,
                                 double window_out,
                                 struct CnlsField **out_field);

/**
 * Copies node values out; either buffer may be null to skip it.
 *
 * # Safety
 * `f` must be a live field handle; non-null buffers valid for `len` writes.
 */
enum CnlsStatus cnls_field_values(const struct CnlsField *f, double *re, double *im, size_t len);

/**
 * # Safety
 * `f` must be null or a field handle not yet freed.
 */
void cnls_field_free(struct CnlsField *f);

/**
 * Places `f` relative to the ground-state threshold.
 *
 * # Safety
 * `b` and `f` must be live handles and `verdict` writable.
 */
enum CnlsStatus cnls_classify(const struct CnlsBundle *b,
                              const struct CnlsField *f,
                              struct CnlsVerdict *verdict);

/**
 * Evolves `f` with the default detector settings and no monitors. On
 * success `final_field`, if not null, receives a new handle holding the
 * last state.
 *
 * # Safety
 * `b` and `f` must be live handles, `summary` writable, and `final_field`
 * null or writable.
 */
enum CnlsStatus cnls_evolve(const struct CnlsBundle *b,
                            const struct CnlsField *f,
                            double dt,
                            double t_end,
                            size_t stride,
                            struct CnlsRunSummary *summary,
                            struct CnlsField **final_field);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CNLS_H */
