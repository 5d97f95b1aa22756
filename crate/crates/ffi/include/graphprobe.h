#ifndef GRAPHPROBE_H
#define GRAPHPROBE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. The numeric values match the command-line
// exit codes where the two overlap.
typedef enum GpStatus {
  GP_STATUS_OK = 0,
  // A required pointer argument was null.
  GP_STATUS_NULL_POINTER = 1,
  // Invalid parameter or configuration.
  GP_STATUS_INVALID_ARGUMENT = 2,
  // An input file is missing; the message names the command producing it.
  GP_STATUS_MISSING_INPUT = 3,
  // Any other failure (I/O, parse, numerical, ...).
  GP_STATUS_RUNTIME = 4,
  // A string argument was not valid UTF-8.
  GP_STATUS_INVALID_UTF8 = 5,
  // An index or name did not match anything.
  GP_STATUS_NOT_FOUND = 6,
  // A bug inside the library; the handle arguments should be discarded.
  GP_STATUS_PANIC = 7,
} GpStatus;

// A labelled graph corpus with its train/test split.
typedef struct GpDataset GpDataset;

// A graph.
typedef struct GpGraph GpGraph;

// A probe table read from `probes.csv`.
typedef struct GpProbes GpProbes;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if it succeeded.
// The pointer stays valid until the next call on the same thread.
const char *gp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gp_version(void);

// Number of graph-level properties computed by [`gp_graph_properties`].
size_t gp_property_count(void);

// Static name of property `index`, or null when out of range.
const char *gp_property_name(size_t index);

// Builds a graph on `n` nodes from `edge_count` pairs stored flat in
// `edges` (`u0, v0, u1, v1, ...`). `edges` may be null when `edge_count` is 0.
//
// # Safety
// `edges` must point to `2 * edge_count` readable values; `out` must be writable.
enum GpStatus gp_graph_new(size_t n,
                           const uint32_t *edges,
                           size_t edge_count,
                           struct GpGraph **out);

// # Safety
// `graph` must be null or a handle from this library not yet freed.
void gp_graph_free(struct GpGraph *graph);

// # Safety
// `graph` must be a live handle; `out_nodes` and `out_edges` writable.
enum GpStatus gp_graph_size(const struct GpGraph *graph, size_t *out_nodes, size_t *out_edges);

// Label of the graph: 0 or 1, or -1 when unlabelled.
//
// # Safety
// `graph` must be a live handle; `out_label` writable.
enum GpStatus gp_graph_label(const struct GpGraph *graph, int32_t *out_label);

// Computes every graph-level property in the order of [`gp_property_name`].
// `values` and `defined` must each hold `len` entries, `len` at least
// [`gp_property_count`]; `defined[i]` is 0 when property `i` is undefined for
// this graph (its value is then meaningless). Stochastic properties draw from
// `seed`.
//
// # Safety
// `graph` must be a live handle; `values` and `defined` writable for `len` entries.
enum GpStatus gp_graph_properties(const struct GpGraph *graph,
                                  uint64_t seed,
                                  double *values,
                                  uint8_t *defined,
                                  size_t len);

// Generates a Grid-House corpus of `count` graphs with default parameters.
//
// # Safety
// `out` must be writable.
enum GpStatus gp_dataset_generate(size_t count, uint64_t seed, struct GpDataset **out);

// Reads a corpus written by `graphprobe generate` or [`gp_dataset_save`].
//
// # Safety
// `path` must be a NUL-terminated string; `out` writable.
enum GpStatus gp_dataset_load(const char *path, struct GpDataset **out);

// # Safety
// `dataset` must be a live handle; `path` a NUL-terminated string.
enum GpStatus gp_dataset_save(const struct GpDataset *dataset, const char *path);

// # Safety
// `dataset` must be null or a handle from this library not yet freed.
void gp_dataset_free(struct GpDataset *dataset);

// # Safety
// `dataset` must be a live handle; `out_len` writable.
enum GpStatus gp_dataset_len(const struct GpDataset *dataset, size_t *out_len);

// A copy of graph `index`, owned by the caller. `out_is_test` (optional)
// receives 1 for test-split graphs, 0 for training graphs.
//
// # Safety
// `dataset` must be a live handle; `out` writable; `out_is_test` null or writable.
enum GpStatus gp_dataset_graph(const struct GpDataset *dataset,
                               size_t index,
                               struct GpGraph **out,
                               uint8_t *out_is_test);

// Runs the whole experiment (generate, properties, train, probe, report)
// into `out_dir`. `config_path` may be null for the defaults.
//
// # Safety
// `config_path` must be null or NUL-terminated; `out_dir` NUL-terminated.
enum GpStatus gp_run_all(const char *config_path, const char *out_dir);

// Reads a probe table written by `graphprobe probe`.
//
// # Safety
// `path` must be NUL-terminated; `out` writable.
enum GpStatus gp_probes_load(const char *path, struct GpProbes **out);

// # Safety
// `probes` must be null or a handle from this library not yet freed.
void gp_probes_free(struct GpProbes *probes);

// Test accuracy of the probed model.
//
// # Safety
// `probes` must be a live handle; `out_accuracy` writable.
enum GpStatus gp_probes_test_accuracy(const struct GpProbes *probes, double *out_accuracy);

// Held-out R² of the probe of `property` on `layer`. Returns
// [`GpStatus::NotFound`] when no such probe exists or its R² is undefined.
//
// # Safety
// `probes` must be a live handle; `layer` and `property` NUL-terminated; `out_r2` writable.
enum GpStatus gp_probes_r2_test(const struct GpProbes *probes,
                                const char *layer,
                                const char *property,
                                double *out_r2);

// Largest held-out R² over the graph-level layers, or NotFound if none is defined.
//
// # Safety
// `probes` must be a live handle; `out_r2` writable.
enum GpStatus gp_probes_max_graph_r2(const struct GpProbes *probes, double *out_r2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHPROBE_H */
