#ifndef TRISTAB_H
#define TRISTAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  TRS_OK = 0,
  /**
   * Null pointer or out-of-range numeric argument.
   */
  TRS_INVALID_ARGUMENT = 1,
  /**
   * Masses and charges do not admit a non-collinear central configuration.
   */
  TRS_INADMISSIBLE = 2,
  /**
   * A numerical guard tripped (integration tolerances).
   */
  TRS_NUMERICAL_FAILURE = 3,
} TrsStatus;

/**
 * Stability classes of the essential monodromy.
 */
typedef enum {
  TRS_EE = 0,
  TRS_EH = 1,
  TRS_HH = 2,
  TRS_CS = 3,
  /**
   * On the transition set (a multiplier pair at +-1 or a Krein collision).
   */
  TRS_BOUNDARY = 4,
} TrsStabilityClass;

/**
 * Opaque handle: a body setup together with its central configuration.
 */
typedef struct TrsConfig TrsConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds the central configuration for three masses and three charges.
 */
TrsStatus trs_config_new(const double *masses, const double *charges, TrsConfig **out);

/**
 * Releases a handle created by `trs_config_new`. Null is a no-op.
 */
void trs_config_free(TrsConfig *ptr);

/**
 * Shape parameter beta in [0, 9]; NaN on null input.
 */
double trs_config_beta(const TrsConfig *ptr);

/**
 * Gravitational parameter mu = k^3 of the equivalent Kepler problem.
 */
double trs_config_mu(const TrsConfig *ptr);

/**
 * Max-norm residual of the central-configuration equation.
 */
double trs_config_residual(const TrsConfig *ptr);

/**
 * Writes the three inner angles (radians) to `out`.
 */
TrsStatus trs_config_angles(const TrsConfig *ptr, double *out);

/**
 * Writes the planar positions as (x1, y1, x2, y2, x3, y3).
 */
TrsStatus trs_config_positions(const TrsConfig *ptr, double *out);

/**
 * Classifies the essential monodromy at bare parameters (beta, ecc).
 */
TrsStatus trs_classify(double beta, double ecc, TrsStabilityClass *out_class);

/**
 * Classifies the configuration's stability at eccentricity `ecc`.
 */
TrsStatus trs_classify_config(const TrsConfig *ptr, double ecc, TrsStabilityClass *out_class);

/**
 * Writes the four Floquet multipliers of the essential monodromy as
 */
TrsStatus trs_multipliers(double beta, double ecc, double *out_re, double *out_im);

/**
 * Nullity of gamma(2 pi) - I (3 on the beta = 0 line, else 0).
 */
TrsStatus trs_nullity(double beta, double ecc, uint32_t *out_nullity);

/**
 * Library version as a static NUL-terminated string.
 */
const char *trs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRISTAB_H */
