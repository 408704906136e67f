#ifndef HYPERMAGNET_H
#define HYPERMAGNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum HmStatus {
  HM_STATUS_OK = 0,
  HM_STATUS_NULL_POINTER = 1,
  HM_STATUS_INVALID_INPUT = 2,
  HM_STATUS_BUFFER_TOO_SMALL = 3,
  HM_STATUS_ISOLATED_VERTEX = 4,
  HM_STATUS_REDUCIBLE = 5,
  HM_STATUS_PERIODIC = 6,
  HM_STATUS_NO_CONVERGENCE = 7,
  HM_STATUS_IO = 8,
  HM_STATUS_INTERNAL = 9,
} HmStatus;

typedef enum HmWalkKind {
  /**
   * Edge-independent weights.
   */
  HM_WALK_KIND_ZHOU = 0,
  /**
   * Edge-dependent vertex weights; degree weights when none are attached.
   */
  HM_WALK_KIND_EDVW = 1,
} HmWalkKind;

typedef enum HmLaplacianForm {
  HM_LAPLACIAN_FORM_NORMALIZED = 0,
  HM_LAPLACIAN_FORM_UNNORMALIZED = 1,
} HmLaplacianForm;

/**
 * A hypergraph with optional edge-dependent vertex weights.
 */
typedef struct HmHypergraph HmHypergraph;

/**
 * A magnetic Laplacian together with its renormalized form, if requested.
 */
typedef struct HmLaplacian HmLaplacian;

/**
 * A row-stochastic transition matrix.
 */
typedef struct HmTransition HmTransition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failed call on this thread, or null. The
 * pointer stays valid until the next failure on the same thread.
 */
const char *hm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hm_version(void);

/**
 * Builds a hypergraph from edges in compressed form: edge `e` holds
 * `vertices[offsets[e] .. offsets[e + 1]]`. `offsets` has `n_edges + 1`
 * entries starting at 0. A null `weights` gives every edge weight 1.
 *
 * # Safety
 * All pointers must be null or valid for the lengths described above.
 */
enum HmStatus hm_hypergraph_new(size_t n_vertices,
                                size_t n_edges,
                                const size_t *offsets,
                                const size_t *vertices,
                                const double *weights,
                                struct HmHypergraph **out);

/**
 * Reads a hypergraph file, keeping any stored vertex weights.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum HmStatus hm_hypergraph_load(const char *path, struct HmHypergraph **out);

/**
 * Attaches edge-dependent vertex weights, given edge by edge in the vertex
 * order of [`hm_hypergraph_edge`]. Columns are normalized on the way in.
 *
 * # Safety
 * `h` must be a live handle and `values` valid for `len` reads.
 */
enum HmStatus hm_hypergraph_set_edvw(struct HmHypergraph *h, const double *values, size_t len);

/**
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum HmStatus hm_hypergraph_n_vertices(const struct HmHypergraph *h, size_t *out);

/**
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum HmStatus hm_hypergraph_n_edges(const struct HmHypergraph *h, size_t *out);

/**
 * Copies the vertices of edge `e`. The edge size is written to `size` even
 * when `out` is too small.
 *
 * # Safety
 * `h` must be a live handle, `size` writable and `out` valid for `cap`
 * writes.
 */
enum HmStatus hm_hypergraph_edge(const struct HmHypergraph *h,
                                 size_t e,
                                 size_t *out,
                                 size_t cap,
                                 size_t *size);

/**
 * Weighted vertex degrees.
 *
 * # Safety
 * `h` must be a live handle and `out` valid for `cap` writes.
 */
enum HmStatus hm_hypergraph_vertex_degrees(const struct HmHypergraph *h, double *out, size_t cap);

/**
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void hm_hypergraph_free(struct HmHypergraph *h);

/**
 * Transition matrix of a random walk on `h`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum HmStatus hm_transition_new(const struct HmHypergraph *h,
                                enum HmWalkKind kind,
                                struct HmTransition **out);

/**
 * Wraps a dense `n x n` row-stochastic matrix.
 *
 * # Safety
 * `values` must be valid for `n * n` reads and `out` writable.
 */
enum HmStatus hm_transition_from_dense(size_t n, const double *values, struct HmTransition **out);

/**
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum HmStatus hm_transition_n(const struct HmTransition *p, size_t *out);

/**
 * Copies the matrix row-major into `out`.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for `cap` writes.
 */
enum HmStatus hm_transition_values(const struct HmTransition *p, double *out, size_t cap);

/**
 * Stationary distribution. With `allow_lazy`, a periodic chain falls back
 * to `(P + I) / 2`, which has the same stationary distribution.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for `cap` writes.
 */
enum HmStatus hm_transition_stationary(const struct HmTransition *p,
                                       bool allow_lazy,
                                       double *out,
                                       size_t cap);

/**
 * Detailed-balance test `max |π_u P_uv − π_v P_vu| < tol`. `residual` may be
 * null.
 *
 * # Safety
 * `p` must be a live handle, `reversible` writable and `residual` null or
 * writable.
 */
enum HmStatus hm_transition_is_reversible(const struct HmTransition *p,
                                          double tol,
                                          bool allow_lazy,
                                          bool *reversible,
                                          double *residual);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void hm_transition_free(struct HmTransition *p);

/**
 * Magnetic Laplacian of `p` with a single charge `q`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum HmStatus hm_laplacian_new(const struct HmTransition *p,
                               double q,
                               enum HmLaplacianForm form,
                               bool renormalize,
                               struct HmLaplacian **out);

/**
 * Magnetic Laplacian with per-pair charges from a symmetric dense `n x n`
 * matrix. Entries off the support of `(P + Pᵀ) / 2` must be zero.
 *
 * # Safety
 * `p` must be a live handle, `charges` valid for `n * n` reads and `out`
 * writable.
 */
enum HmStatus hm_laplacian_with_charges(const struct HmTransition *p,
                                        const double *charges,
                                        enum HmLaplacianForm form,
                                        bool renormalize,
                                        struct HmLaplacian **out);

/**
 * # Safety
 * `l` must be a live handle and `out` writable.
 */
enum HmStatus hm_laplacian_n(const struct HmLaplacian *l, size_t *out);

/**
 * Copies the Laplacian row-major as separate real and imaginary parts.
 *
 * # Safety
 * `l` must be a live handle and `re`, `im` valid for `cap` writes each.
 */
enum HmStatus hm_laplacian_values(const struct HmLaplacian *l, double *re, double *im, size_t cap);

/**
 * Copies `(2 / λ_max) L − I`; fails unless the Laplacian was built with
 * `renormalize`.
 *
 * # Safety
 * `l` must be a live handle and `re`, `im` valid for `cap` writes each.
 */
enum HmStatus hm_laplacian_renormalized(const struct HmLaplacian *l,
                                        double *re,
                                        double *im,
                                        size_t cap);

/**
 * Eigenvalues in ascending order.
 *
 * # Safety
 * `l` must be a live handle and `out` valid for `cap` writes.
 */
enum HmStatus hm_laplacian_eigenvalues(const struct HmLaplacian *l, double *out, size_t cap);

/**
 * Largest eigenvalue.
 *
 * # Safety
 * `l` must be a live handle and `out` writable.
 */
enum HmStatus hm_laplacian_lambda_max(const struct HmLaplacian *l, double *out);

/**
 * # Safety
 * `l` must be null or a handle not yet freed.
 */
void hm_laplacian_free(struct HmLaplacian *l);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERMAGNET_H */
