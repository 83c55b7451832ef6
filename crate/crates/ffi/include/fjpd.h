#ifndef FJPD_H
#define FJPD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FjpdStatus {
  FJPD_STATUS_OK = 0,
  FJPD_STATUS_NULL_POINTER = 1,
  FJPD_STATUS_INVALID_ARGUMENT = 2,
  FJPD_STATUS_PARSE_ERROR = 3,
  FJPD_STATUS_DIMENSION_MISMATCH = 4,
  FJPD_STATUS_NON_CONVERGENCE = 5,
  FJPD_STATUS_INTERNAL = 6,
  FJPD_STATUS_PANIC = 7,
} FjpdStatus;

/**
 * Opaque graph handle. Create with `fjpd_graph_from_*`, release with
 * [`fjpd_graph_free`].
 */
typedef struct FjpdGraph FjpdGraph;

/**
 * Solver settings. `max_iterations = 0` picks the library default.
 */
typedef struct FjpdSolverOptions {
  double rel_tolerance;
  size_t max_iterations;
} FjpdSolverOptions;

/**
 * PD components. The `*_alt` fields are NaN unless the alternative
 * definition was requested.
 */
typedef struct FjpdPdReport {
  double polarization;
  double disagreement;
  double pd;
  double polarization_alt;
  double pd_alt;
} FjpdPdReport;

typedef struct FjpdPerturbation {
  double pd_before;
  double pd_after;
  /**
   * `[(I+L)⁻¹]_ll`.
   */
  double r_ll;
  double shift_term;
  double damping_term;
} FjpdPerturbation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fjpd_version(void);

/**
 * Message for the last failed call on this thread, or "" after a success.
 * Valid until the next `fjpd_*` call on the same thread.
 */
const char *fjpd_last_error_message(void);

/**
 * Parses an edge list (`u v [w]` per line, labels mapped to ids in
 * first-seen order).
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum FjpdStatus fjpd_graph_from_edge_list(const char *text, struct FjpdGraph **out);

/**
 * Builds a graph on `n` nodes from `m` edges `(us[i], vs[i], ws[i])`.
 * `ws` may be null for unit weights.
 *
 * # Safety
 * `us` and `vs` (and `ws` if non-null) must point to `m` elements; `out`
 * must be a valid pointer.
 */
enum FjpdStatus fjpd_graph_from_edges(size_t n,
                                      const size_t *us,
                                      const size_t *vs,
                                      const double *ws,
                                      size_t m,
                                      struct FjpdGraph **out);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `g` must come from `fjpd_graph_from_*` and not have been freed.
 */
void fjpd_graph_free(struct FjpdGraph *g);

/**
 * # Safety
 * `g` must be a live handle; `nodes` and `edges` valid pointers.
 */
enum FjpdStatus fjpd_graph_counts(const struct FjpdGraph *g, size_t *nodes, size_t *edges);

/**
 * # Safety
 * `g` must be a live handle; `out` a valid pointer.
 */
enum FjpdStatus fjpd_graph_total_weight(const struct FjpdGraph *g, double *out);

/**
 * `out = L x`.
 *
 * # Safety
 * `x` and `out` must each hold `n` doubles.
 */
enum FjpdStatus fjpd_laplacian_apply(const struct FjpdGraph *g,
                                     const double *x,
                                     size_t n,
                                     double *out);

/**
 * Writes `z* = (L+K)⁻¹Ks` to `z_out`. `k` may be null for `K = I`;
 * `opts` may be null for defaults.
 *
 * # Safety
 * `s`, `z_out` (and `k` if non-null) must each hold `n` doubles.
 */
enum FjpdStatus fjpd_solve_equilibrium(const struct FjpdGraph *g,
                                       const double *s,
                                       const double *k,
                                       size_t n,
                                       const struct FjpdSolverOptions *opts,
                                       double *z_out);

/**
 * Standard PD; the alternative fields are set to NaN.
 *
 * # Safety
 * As for [`fjpd_solve_equilibrium`]; `out` must be a valid pointer.
 */
enum FjpdStatus fjpd_pd_index(const struct FjpdGraph *g,
                              const double *s,
                              const double *k,
                              size_t n,
                              const struct FjpdSolverOptions *opts,
                              struct FjpdPdReport *out);

/**
 * Standard and stubbornness-weighted PD.
 *
 * # Safety
 * As for [`fjpd_pd_index`].
 */
enum FjpdStatus fjpd_pd_alternative(const struct FjpdGraph *g,
                                    const double *s,
                                    const double *k,
                                    size_t n,
                                    const struct FjpdSolverOptions *opts,
                                    struct FjpdPdReport *out);

/**
 * PD after raising node `l`'s stubbornness from 1 to `1 + epsilon`.
 * With `exact` non-zero the closed form for a neutral node is used and
 * `s` must sum to zero with `s[l] = 0`; otherwise the rank-one update
 * handles any `s`. No direct cross-check is run.
 *
 * # Safety
 * `s` must hold `n` doubles; `out` must be a valid pointer.
 */
enum FjpdStatus fjpd_perturbed_pd(const struct FjpdGraph *g,
                                  const double *s,
                                  size_t n,
                                  size_t l,
                                  double epsilon,
                                  int32_t exact,
                                  const struct FjpdSolverOptions *opts,
                                  struct FjpdPerturbation *out);

/**
 * Closed-form PD on the expected two-block SBM with `K = αI`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FjpdStatus fjpd_sbm_pd_closed_form(size_t n,
                                        double p,
                                        double q,
                                        double alpha,
                                        int32_t alternative,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FJPD_H */
