#ifndef CASIMIR_H
#define CASIMIR_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CasimirComponent {
  CASIMIR_COMPONENT_NORMAL = 0,
  CASIMIR_COMPONENT_TANGENTIAL = 1,
} CasimirComponent;

typedef enum CasimirDimensionality {
  CASIMIR_DIMENSIONALITY_TWO = 2,
  CASIMIR_DIMENSIONALITY_THREE = 3,
} CasimirDimensionality;

typedef enum CasimirStatus {
  CASIMIR_STATUS_OK = 0,
  CASIMIR_STATUS_NULL_POINTER = 1,
  CASIMIR_STATUS_INVALID_UTF8 = 2,
  CASIMIR_STATUS_CONFIG = 3,
  CASIMIR_STATUS_GEOMETRY = 4,
  CASIMIR_STATUS_DOMAIN = 5,
  CASIMIR_STATUS_PRECONDITION = 6,
  CASIMIR_STATUS_NUMERICAL = 7,
  CASIMIR_STATUS_NON_CONVERGENT = 8,
  CASIMIR_STATUS_IO = 9,
  CASIMIR_STATUS_PANIC = 10,
} CasimirStatus;

// Run configuration: geometry, physics and numerics.
typedef struct CasimirConfig CasimirConfig;

// Forces for one configuration.
typedef struct CasimirForces CasimirForces;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *casimir_last_error(void);

// Library version as a static NUL-terminated string.
const char *casimir_version(void);

// Parse a JSON run configuration.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum CasimirStatus casimir_config_from_json(const char *json, struct CasimirConfig **out);

// Rack geometry with default numerics, massless field, sine tilt rule.
//
// # Safety
// `out` must be a valid pointer.
enum CasimirStatus casimir_config_rack(double a,
                                       double u,
                                       double v,
                                       double s,
                                       double l,
                                       double h,
                                       struct CasimirConfig **out);

// Change the lateral shift `s`.
//
// # Safety
// `config` must be a handle from this library that has not been freed.
enum CasimirStatus casimir_config_set_shift(struct CasimirConfig *config, double s);

// Change the field mass `m`.
//
// # Safety
// `config` must be a handle from this library that has not been freed.
enum CasimirStatus casimir_config_set_mass(struct CasimirConfig *config, double m);

// Change the target element size and the number of realised periods.
//
// # Safety
// `config` must be a handle from this library that has not been freed.
enum CasimirStatus casimir_config_set_mesh(struct CasimirConfig *config,
                                           double element_size,
                                           uint32_t periods_realized);

// Release a configuration; null is ignored.
//
// # Safety
// `config` must be null or a handle from this library not yet freed.
void casimir_config_free(struct CasimirConfig *config);

// Forces per period for the configuration, both components and
// dimensionalities.
//
// # Safety
// `config` must be a live handle and `out` a valid pointer.
enum CasimirStatus casimir_compute(const struct CasimirConfig *config, struct CasimirForces **out);

// One force per period and its error estimate. Normal forces are the
// x-component on the upper plate; negative means attraction.
//
// # Safety
// `forces` must be a live handle; `value` and `error` valid pointers.
enum CasimirStatus casimir_forces_get(const struct CasimirForces *forces,
                                      enum CasimirDimensionality dim,
                                      enum CasimirComponent component,
                                      double *value,
                                      double *error);

// Number of boundary elements used for the forces.
//
// # Safety
// `forces` must be a live handle.
size_t casimir_forces_elements(const struct CasimirForces *forces);

// Release a result; null is ignored.
//
// # Safety
// `forces` must be null or a handle from this library not yet freed.
void casimir_forces_free(struct CasimirForces *forces);

// Closed-form force between flat plates at distance `gap`, per unit length
// (2D) or area (3D), massless field.
//
// # Safety
// `out` must be a valid pointer.
enum CasimirStatus casimir_flat_plate_force(enum CasimirDimensionality dim,
                                            double gap,
                                            double *out);

// Modified Bessel function `K_order(x)` for order 0, 1 or 2.
//
// # Safety
// `out` must be a valid pointer.
enum CasimirStatus casimir_bessel_k(uint32_t order, double x, double *out);

// Whether a configuration uses the rack family (1) or an explicit profile
// (0).
//
// # Safety
// `config` must be a live handle.
int32_t casimir_config_is_rack(const struct CasimirConfig *config);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CASIMIR_H */
