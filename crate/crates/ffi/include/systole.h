#ifndef SYSTOLE_H
#define SYSTOLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every function.
typedef enum SystoleStatus {
  SYSTOLE_STATUS_OK = 0,
  SYSTOLE_STATUS_NULL_POINTER = 1,
  SYSTOLE_STATUS_NOT_HYPERBOLIC = 2,
  SYSTOLE_STATUS_TOO_LARGE = 3,
  SYSTOLE_STATUS_BAD_ARGUMENT = 4,
  SYSTOLE_STATUS_INVARIANT = 5,
  SYSTOLE_STATUS_TIMEOUT = 6,
  SYSTOLE_STATUS_NUMERICAL = 7,
  SYSTOLE_STATUS_INDETERMINATE_RANK = 8,
  SYSTOLE_STATUS_BUFFER_TOO_SMALL = 9,
  SYSTOLE_STATUS_INTERNAL = 10,
} SystoleStatus;

// Which filling problem to solve.
typedef enum SystoleFillingKind {
  SYSTOLE_FILLING_KIND_MIN = 0,
  SYSTOLE_FILLING_KIND_MAX = 1,
} SystoleFillingKind;

// Opaque surface handle.
typedef struct SystoleSurface SystoleSurface;

// Result of the index computation.
typedef struct SystoleIndex {
  uintptr_t index;
  uintptr_t parameters;
  double spectral_gap;
  double holonomy_defect;
  bool eutactic;
} SystoleIndex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *systole_last_error(void);

// Builds the surface for parameter `m` and stores a new handle in `out`.
//
// # Safety
// `out` must be a valid pointer; free the handle with `systole_surface_free`.
enum SystoleStatus systole_surface_new(uintptr_t m, struct SystoleSurface **out);

// # Safety
// `s` must be null or a handle from `systole_surface_new` not yet freed.
void systole_surface_free(struct SystoleSurface *s);

// # Safety
// `s` must be a live handle and `genus`, `systoles` valid pointers.
enum SystoleStatus systole_surface_info(const struct SystoleSurface *s,
                                        uintptr_t *genus,
                                        uintptr_t *systoles);

// Whether systoles `i` and `j` intersect.
//
// # Safety
// `s` must be a live handle and `out` a valid pointer.
enum SystoleStatus systole_surface_intersects(const struct SystoleSurface *s,
                                              uintptr_t i,
                                              uintptr_t j,
                                              bool *out);

// Smallest or largest minimal filling set. Systole indices are written to
// `ids` (capacity `cap`), their count to `len`. With a too-small buffer the
// call returns `BUFFER_TOO_SMALL` and still sets `len`. `time_limit_seconds`
// of zero or less means no limit.
//
// # Safety
// `s` must be a live handle; `ids` must hold `cap` entries; `len` and
// `proved_optimal` must be valid pointers.
enum SystoleStatus systole_filling(const struct SystoleSurface *s,
                                   enum SystoleFillingKind kind,
                                   double time_limit_seconds,
                                   uintptr_t threads,
                                   uintptr_t *ids,
                                   uintptr_t cap,
                                   uintptr_t *len,
                                   bool *proved_optimal);

// Rank of the span of the given systoles in rational homology.
//
// # Safety
// `s` must be a live handle, `ids` must hold `len` entries, `out` valid.
enum SystoleStatus systole_homology_rank(const struct SystoleSurface *s,
                                         const uintptr_t *ids,
                                         uintptr_t len,
                                         uintptr_t *out);

// Morse index of the systole function at the critical point, with default
// numerical settings.
//
// # Safety
// `s` must be a live handle and `out` a valid pointer.
enum SystoleStatus systole_index(const struct SystoleSurface *s, struct SystoleIndex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYSTOLE_H */
