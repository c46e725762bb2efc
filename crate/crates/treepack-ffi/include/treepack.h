#ifndef TREEPACK_H
#define TREEPACK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 How `tp_decompose` solves the instance.
 */
typedef enum TpMode {
  TP_MODE_PIPELINE = 0,
  TP_MODE_ORACLE = 1,
  TP_MODE_HYBRID = 2,
} TpMode;

/*
 Status codes. The numeric values match the command-line exit codes.
 */
typedef enum TpStatus {
  TP_STATUS_OK = 0,
  /*
   A required pointer was null.
   */
  TP_STATUS_NULL = 1,
  TP_STATUS_INPUT = 2,
  TP_STATUS_CONFIG = 3,
  TP_STATUS_CLASSIFICATION = 4,
  TP_STATUS_ABORT = 5,
  TP_STATUS_INFEASIBLE = 6,
  TP_STATUS_BUDGET = 7,
  TP_STATUS_INTERNAL = 70,
  /*
   A Rust panic was caught at the boundary.
   */
  TP_STATUS_PANIC = 99,
} TpStatus;

/*
 Opaque host graph.
 */
typedef struct TpGraph TpGraph;

/*
 Opaque outcome of `tp_decompose`.
 */
typedef struct TpResult TpResult;

/*
 Opaque tree.
 */
typedef struct TpTree TpTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; empty if none. Valid until
 the next failing call on the same thread.
 */
const char *tp_last_error(void);

/*
 `K_n`.
 */
enum TpStatus tp_graph_complete(size_t n, struct TpGraph **out);

/*
 Graph on `n` vertices from `m` edges given as `2m` endpoints.
 */
enum TpStatus tp_graph_from_edges(size_t n, const size_t *edges, size_t m, struct TpGraph **out);

size_t tp_graph_edge_count(const struct TpGraph *g);

/*
 # Safety
 `g` is null or a handle from `tp_graph_*` not yet freed.
 */
void tp_graph_free(struct TpGraph *g);

/*
 Tree on `n` vertices from its `n - 1` edges given as `2(n - 1)` endpoints.
 */
enum TpStatus tp_tree_from_edges(size_t n, const size_t *edges, size_t m, struct TpTree **out);

/*
 # Safety
 `t` is null or a handle from `tp_tree_from_edges` not yet freed.
 */
void tp_tree_free(struct TpTree *t);

/*
 Decomposes `g` into copies of `t`. On `TP_STATUS_OK` `*out` holds a
 verified decomposition. On other statuses `*out` is still set when the
 run got far enough to write a summary, and must be freed.
 */
enum TpStatus tp_decompose(const struct TpGraph *g,
                           const struct TpTree *t,
                           uint64_t seed,
                           enum TpMode mode,
                           struct TpResult **out);

/*
 Number of copies (0 unless the run succeeded).
 */
size_t tp_result_copy_count(const struct TpResult *r);

/*
 Writes the host vertex of every tree vertex of copy `w` into `buf`
 (`len` entries, at least the tree's vertex count).
 */
enum TpStatus tp_result_copy(const struct TpResult *r, size_t w, size_t *buf, size_t len);

/*
 Decomposition JSON (empty string unless the run succeeded). Owned by `r`.
 */
const char *tp_result_json(const struct TpResult *r);

/*
 Run summary JSON: case, stage reached, error class and reason. Owned by `r`.
 */
const char *tp_result_summary(const struct TpResult *r);

/*
 # Safety
 `r` is null or a handle from `tp_decompose` not yet freed.
 */
void tp_result_free(struct TpResult *r);

/*
 Checks a decomposition JSON. `TP_STATUS_INFEASIBLE` means it parsed but
 is not a valid decomposition; the violation is in `tp_last_error`.

 # Safety
 `json` is null or a NUL-terminated string.
 */
enum TpStatus tp_verify_json(const char *json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREEPACK_H */
