#ifndef SPECFORGE_H
#define SPECFORGE_H

/* Generated by cbindgen from specforge-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes for every FFI entry point.
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_POINTER = 1,
  SF_STATUS_INVALID_UTF8 = 2,
  SF_STATUS_LEX_ERROR = 3,
  SF_STATUS_PARSE_ERROR = 4,
  SF_STATUS_INTERNAL_ERROR = 5,
} SfStatus;

// Opaque list of extracted annotations.
typedef struct SfAnnotations SfAnnotations;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Most recent error message on this thread, or NULL when the last call
// succeeded. The pointer is owned by the library and valid until the next
// FFI call on the same thread; do not free it.
const char *sf_last_error(void);

// Release a string returned by this library.
//
// # Safety
// `s` must be a pointer previously returned through an out parameter of a
// specforge function, not yet freed, or NULL.
void sf_string_free(char *s);

// Count ACSL clauses in a C file. `out_csv` receives two lines: the fixed
// CSV header and one data row with empty context columns.
//
// # Safety
// `source` must point to a NUL-terminated string; `out_csv` must be a
// valid writable pointer.
enum SfStatus sf_count_csv(const char *source, char **out_csv);

// Remove every ACSL annotation, preserving code and plain comments.
//
// # Safety
// `source` must point to a NUL-terminated string; `out_source` must be a
// valid writable pointer.
enum SfStatus sf_strip_annotations(const char *source, char **out_source);

// Rename user-defined functions to f1, f2, … in definition order.
// `out_source` receives the renamed program; `out_rename_map_json` a JSON
// array of [original, placeholder] pairs.
//
// # Safety
// `source` must point to a NUL-terminated string; both out parameters
// must be valid writable pointers.
enum SfStatus sf_anonymize(const char *source,
                           bool strip_comments,
                           char **out_source,
                           char **out_rename_map_json);

// Compare two files on code tokens only. `out_equal` receives the verdict;
// `out_divergence_json` receives the first differing token pair as JSON,
// or NULL when the files are equivalent.
//
// # Safety
// `left` and `right` must point to NUL-terminated strings; `out_equal`
// and `out_divergence_json` must be valid writable pointers.
enum SfStatus sf_code_token_equivalent(const char *left,
                                       const char *right,
                                       bool *out_equal,
                                       char **out_divergence_json);

// Validate that `annotated` only adds annotations to `original`. The
// result is the JSON form of the validation record: `{ok, failures}`.
//
// # Safety
// `original` and `annotated` must point to NUL-terminated strings;
// `out_json` must be a valid writable pointer.
enum SfStatus sf_validate(const char *original, const char *annotated, char **out_json);

// Parse an EVA report into JSON: alarms, final states, non-termination,
// summary.
//
// # Safety
// `text` must point to a NUL-terminated string; `out_json` must be a
// valid writable pointer.
enum SfStatus sf_parse_eva_report(const char *text, char **out_json);

// Parse a PathCrawler CSV table into JSON. `pad_ragged_rows` selects the
// lenient ragged-row policy; the default behavior is to reject.
//
// # Safety
// `text` must point to a NUL-terminated string; `out_json` must be a
// valid writable pointer.
enum SfStatus sf_parse_pathcrawler_csv(const char *text, bool pad_ragged_rows, char **out_json);

// Extract every ACSL clause from annotated C. On success `out` receives an
// owned handle to release with [`sf_annotations_free`].
//
// # Safety
// `source` must point to a NUL-terminated string; `out` must be a valid
// writable pointer.
enum SfStatus sf_annotations_parse(const char *source, struct SfAnnotations **out);

// Number of clauses behind the handle. Returns 0 for NULL.
//
// # Safety
// `handle` must be NULL or a live handle from [`sf_annotations_parse`].
uintptr_t sf_annotations_len(const struct SfAnnotations *handle);

// One clause as JSON: `{kind, clause_text, enclosing_function, span}`.
//
// # Safety
// `handle` must be a live handle from [`sf_annotations_parse`]; `out_json`
// must be a valid writable pointer.
enum SfStatus sf_annotations_get(const struct SfAnnotations *handle,
                                 uintptr_t index,
                                 char **out_json);

// Release a handle from [`sf_annotations_parse`].
//
// # Safety
// `handle` must be NULL or a live handle not yet freed.
void sf_annotations_free(struct SfAnnotations *handle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECFORGE_H */
