#ifndef DYADREC_H
#define DYADREC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum DrStatus {
  DR_STATUS_OK = 0,
  DR_STATUS_NULL_POINTER = 1,
  DR_STATUS_INVALID_ARGUMENT = 2,
  DR_STATUS_IO = 3,
  DR_STATUS_DEGENERATE = 4,
  DR_STATUS_UNDEFINED_CORRELATION = 5,
  DR_STATUS_INTEGRITY = 6,
  DR_STATUS_BUFFER_TOO_SMALL = 7,
  DR_STATUS_PANIC = 8,
} DrStatus;

typedef enum DrClass {
  DR_CLASS_RECIPROCAL = 0,
  DR_CLASS_PARTIALLY_RECIPROCAL = 1,
  DR_CLASS_NON_RECIPROCAL = 2,
} DrClass;

typedef enum DrAssortativityMode {
  DR_ASSORTATIVITY_MODE_MUTUAL_BACKBONE = 0,
  DR_ASSORTATIVITY_MODE_ALL_ARCS = 1,
} DrAssortativityMode;

/**
 * Opaque graph handle.
 */
typedef struct DrGraph DrGraph;

typedef struct DrCensus {
  uint64_t mutual;
  uint64_t asymmetric;
  uint64_t null_dyads;
  uint64_t total_arcs;
} DrCensus;

typedef struct DrReciprocity {
  /**
   * Lower vertex id of the pair.
   */
  uint32_t a;
  uint32_t b;
  double w_ab;
  double w_ba;
  double p_ab;
  double p_ba;
  double r_value;
  enum DrClass dyad_class;
} DrReciprocity;

typedef struct DrRewireStats {
  uint64_t attempted_swaps;
  uint64_t accepted_swaps;
  /**
   * Meaningful only when `residual_defined` is true.
   */
  double residual_assortativity;
  bool residual_defined;
  bool stalled;
} DrRewireStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next `dr_` call on the same thread.
 */
const char *dr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dr_version(void);

/**
 * Loads a `src,dst,weight` snapshot (and its vertex sidecar, if present).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DrStatus dr_graph_load(const char *path_, struct DrGraph **out);

/**
 * Builds a graph from `len` parallel arrays of arcs. Self-loops are
 * dropped and repeated arcs summed.
 *
 * # Safety
 * `src`, `dst` and `weight` must each point to `len` readable elements
 * (they may be null when `len` is 0); `out` must be writable.
 */
enum DrStatus dr_graph_from_arcs(uint32_t vertex_count,
                                 const uint32_t *src,
                                 const uint32_t *dst,
                                 const double *weight,
                                 size_t len,
                                 struct DrGraph **out);

/**
 * Writes the graph as a snapshot at `path`.
 *
 * # Safety
 * `g` must be a live handle; `path` a NUL-terminated string.
 */
enum DrStatus dr_graph_save(const struct DrGraph *g, const char *path_);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `g` must come from this library and not be used afterwards.
 */
void dr_graph_free(struct DrGraph *g);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t dr_graph_vertex_count(const struct DrGraph *g);

/**
 * Arc count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t dr_graph_arc_count(const struct DrGraph *g);

/**
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
enum DrStatus dr_graph_out_strength(const struct DrGraph *g, uint32_t v, double *out);

/**
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
enum DrStatus dr_graph_census(const struct DrGraph *g, struct DrCensus *out);

/**
 * Reciprocity of the pair `{i, j}`, which must be mutual.
 *
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
enum DrStatus dr_reciprocity(const struct DrGraph *g,
                             uint32_t i,
                             uint32_t j,
                             struct DrReciprocity *out);

/**
 * Fills `buf` with every mutual dyad in `(a, b)` order. `count` always
 * receives the number of dyads; pass a null `buf` to query it. Returns
 * `BufferTooSmall` without writing when `capacity` is short.
 *
 * # Safety
 * `g` must be a live handle; `count` writable; `buf` null or writable for
 * `capacity` elements.
 */
enum DrStatus dr_reciprocity_all(const struct DrGraph *g,
                                 struct DrReciprocity *buf,
                                 size_t capacity,
                                 size_t *count);

/**
 * # Safety
 * `out` must be writable.
 */
enum DrStatus dr_classify(double r_value, enum DrClass *out);

/**
 * Concentration of `v`'s out-weights; needs out-degree >= 2.
 *
 * # Safety
 * `g` must be a live handle; `h` and `h_star` writable.
 */
enum DrStatus dr_concentration(const struct DrGraph *g, uint32_t v, double *h, double *h_star);

/**
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
enum DrStatus dr_assortativity(const struct DrGraph *g, enum DrAssortativityMode mode, double *out);

/**
 * New handle with every vertex's strength spread evenly over its arcs.
 *
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
enum DrStatus dr_equidisperse(const struct DrGraph *g, struct DrGraph **out);

/**
 * New handle with the mutual backbone randomised by degree-preserving
 * swaps. `stats` may be null.
 *
 * # Safety
 * `g` must be a live handle; `out` writable; `stats` null or writable.
 */
enum DrStatus dr_rewire(const struct DrGraph *g,
                        uint64_t seed,
                        uint32_t swap_multiplier,
                        struct DrRewireStats *stats,
                        struct DrGraph **out);

/**
 * Four-regime comparison as a JSON document. Free the result with
 * [`dr_string_free`].
 *
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
enum DrStatus dr_regime_comparison_json(const struct DrGraph *g,
                                        uint64_t seed,
                                        uint32_t swap_multiplier,
                                        char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void dr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYADREC_H */
