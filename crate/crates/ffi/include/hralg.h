#ifndef HRALG_H
#define HRALG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirroring the CLI exit codes.
 */
typedef enum HralgStatus {
  /**
   * The call succeeded.
   */
  HRALG_STATUS_OK = 0,
  /**
   * The call succeeded and the answer is negative.
   */
  HRALG_STATUS_NO = 1,
  /**
   * Malformed input or a violated precondition.
   */
  HRALG_STATUS_INVALID_INPUT = 2,
  /**
   * A configured resource bound was exceeded.
   */
  HRALG_STATUS_RESOURCE_LIMIT = 3,
} HralgStatus;

/**
 * An opaque graph with sources.
 */
typedef struct HralgGraph HralgGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the most recent error message of this thread, or null when the
 * last call succeeded. Free with [`hralg_string_free`].
 */
char *hralg_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `ptr` must have been returned by a function of this library and not
 * freed before.
 */
void hralg_string_free(char *ptr);

/**
 * Parses a graph from its textual format. Returns null on error.
 *
 * # Safety
 * `text` must be a valid NUL-terminated UTF-8 string.
 */
struct HralgGraph *hralg_graph_parse(const char *text);

/**
 * Evaluates a ground term (textual format) into a graph. Returns null on
 * error.
 *
 * # Safety
 * `text` must be a valid NUL-terminated UTF-8 string.
 */
struct HralgGraph *hralg_term_eval(const char *text);

/**
 * Releases a graph handle.
 *
 * # Safety
 * `g` must have been returned by this library and not freed before.
 */
void hralg_graph_free(struct HralgGraph *g);

/**
 * Renders a graph in its textual format. Free with [`hralg_string_free`].
 *
 * # Safety
 * `g` must be a live handle from this library.
 */
char *hralg_graph_to_text(const struct HralgGraph *g);

/**
 * # Safety
 * `g` must be a live handle from this library.
 */
uintptr_t hralg_graph_vertex_count(const struct HralgGraph *g);

/**
 * # Safety
 * `g` must be a live handle from this library.
 */
uintptr_t hralg_graph_edge_count(const struct HralgGraph *g);

/**
 * Decides isomorphism of two graphs; writes the answer to `result`.
 *
 * # Safety
 * `a` and `b` must be live handles, `result` a valid pointer.
 */
enum HralgStatus hralg_graph_isomorphic(const struct HralgGraph *a,
                                        const struct HralgGraph *b,
                                        bool *result);

/**
 * Exact treewidth of a graph; writes the width to `width`.
 *
 * # Safety
 * `g` must be a live handle, `width` a valid pointer.
 */
enum HralgStatus hralg_graph_treewidth(const struct HralgGraph *g,
                                       uintptr_t max_vertices,
                                       int64_t *width);

/**
 * Parses the graph into a parse tree (min-fill decomposition, automatic
 * label budget) and returns its textual format. Free the string with
 * [`hralg_string_free`]; returns null on error.
 *
 * # Safety
 * `g` must be a live handle from this library.
 */
char *hralg_graph_parse_tree(const struct HralgGraph *g);

/**
 * Evaluates a parse tree (textual format) back into a graph. Returns null
 * on error.
 *
 * # Safety
 * `text` must be a valid NUL-terminated UTF-8 string.
 */
struct HralgGraph *hralg_parse_tree_val(const char *text);

/**
 * Model-checks a sentence (formula file format) over a structure
 * (textual format); writes the answer to `result`.
 *
 * # Safety
 * `structure` and `formula` must be valid NUL-terminated UTF-8 strings,
 * `result` a valid pointer.
 */
enum HralgStatus hralg_model_check(const char *structure, const char *formula, bool *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HRALG_H */
