#ifndef CLAIMWISE_H
#define CLAIMWISE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Largest game accepted as a value table (2^20 doubles).
 */
#define CW_MAX_TABLE_PLAYERS 20

typedef enum cw_corpus_format {
  CW_JSON_LINES = 0,
  CW_DELIMITED = 1,
} cw_corpus_format;

typedef enum cw_status {
  CW_OK = 0,
  CW_NULL_POINTER = 1,
  CW_INVALID_UTF8 = 2,
  CW_INVALID_ARGUMENT = 3,
  CW_VALIDATION = 4,
  CW_BACKEND = 5,
  CW_IO = 6,
  CW_PANIC = 7,
} cw_status;

typedef enum cw_verdict {
  CW_SUPPORTS = 0,
  CW_REFUTES = 1,
} cw_verdict;

/*
 Opaque corpus handle.
 */
typedef struct cw_corpus cw_corpus;

typedef struct cw_corpus_stats {
  size_t total;
  size_t supports;
  size_t refutes;
  double mean_claim_tokens;
  double mean_evidence_tokens;
} cw_corpus_stats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. The pointer
 stays valid until the next call into the library from this thread.
 */
const char *cw_last_error(void);

/*
 Release a string returned by this library. NULL is accepted.

 # Safety
 `s` must come from this library and must not be freed twice.
 */
void cw_string_free(char *s);

/*
 Verdict prompt for a claim and its rationale.

 # Safety
 `claim` and `rationale` must be NUL-terminated; `out` must be writable.
 */
enum cw_status cw_build_copa_prompt(const char *claim, const char *rationale, char **out);

/*
 Explanation text for a verdict and rationale.

 # Safety
 `rationale` must be NUL-terminated; `out` must be writable.
 */
enum cw_status cw_compose_nle(enum cw_verdict verdict, const char *rationale, char **out);

/*
 Entailment prompt for a claim and an explanation text.

 # Safety
 `claim` and `nle` must be NUL-terminated; `out` must be writable.
 */
enum cw_status cw_build_nli_prompt(const char *claim, const char *nle, char **out);

/*
 Decode a text-to-text generation into a verdict.

 # Safety
 `raw` must be NUL-terminated; `out` must be writable.
 */
enum cw_status cw_decode_verdict(const char *raw, enum cw_verdict *out);

/*
 Map a raw corpus label (`True` / `False`) onto a verdict.

 # Safety
 `raw` must be NUL-terminated; `out` must be writable.
 */
enum cw_status cw_map_verdict_label(const char *raw, enum cw_verdict *out);

/*
 Macro-F1 over `n` label codes (0 = Supports, 1 = Refutes).

 # Safety
 `predicted` and `gold` must each point to `n` readable bytes.
 */
enum cw_status cw_macro_f1(const uint8_t *predicted, const uint8_t *gold, size_t n, double *out);

/*
 `100 * count / total`, cut to one decimal.

 # Safety
 `out` must be writable.
 */
enum cw_status cw_one_decimal_percentage(size_t count, size_t total, double *out);

/*
 Deterministic lead-sentence summary bounded to `[min_tokens, max_tokens]`.

 # Safety
 `evidence` must be NUL-terminated; `out` must be writable.
 */
enum cw_status cw_stub_summarize(const char *evidence,
                                 size_t min_tokens,
                                 size_t max_tokens,
                                 char **out);

/*
 Parse a corpus file into a new handle.

 # Safety
 `path` must be NUL-terminated; `out` must be writable.
 */
enum cw_status cw_corpus_load(const char *path,
                              enum cw_corpus_format format,
                              struct cw_corpus **out);

/*
 Drop evidence paragraphs citing a blocklisted outlet, and records left
 with no evidence. `blocklist_path` may be NULL for the built-in list.
 Writes the number of dropped records to `dropped` when it is not NULL.

 # Safety
 `corpus` must be a live handle; `blocklist_path` NULL or NUL-terminated.
 */
enum cw_status cw_corpus_clean(struct cw_corpus *corpus,
                               const char *blocklist_path,
                               size_t *dropped);

/*
 Number of records held; 0 for NULL.

 # Safety
 `corpus` must be NULL or a live handle.
 */
size_t cw_corpus_len(const struct cw_corpus *corpus);

/*
 # Safety
 `corpus` must be a live handle; `out` must be writable.
 */
enum cw_status cw_corpus_get_stats(const struct cw_corpus *corpus, struct cw_corpus_stats *out);

/*
 Train / validation / test sizes for a seeded split of the corpus.

 # Safety
 `corpus` must be a live handle; `ratios` must point to three doubles;
 `sizes_out` must point to three writable `size_t`.
 */
enum cw_status cw_corpus_split_sizes(const struct cw_corpus *corpus,
                                     const double *ratios,
                                     uint64_t seed,
                                     size_t *sizes_out);

/*
 Release a corpus handle. NULL is accepted.

 # Safety
 `corpus` must come from [`cw_corpus_load`] and must not be freed twice.
 */
void cw_corpus_free(struct cw_corpus *corpus);

/*
 Exact Shapley values of a game given as `2^n_players` coalition values
 indexed by membership bitmask (bit `i` set when player `i` is present).

 # Safety
 `values` must hold `2^n_players` doubles; `phi_out` must hold `n_players`.
 */
enum cw_status cw_exact_shapley(const double *values, size_t n_players, double *phi_out);

/*
 Permutation-sampling Shapley estimate over the same table layout.

 # Safety
 `values` must hold `2^n_players` doubles; `phi_out` must hold `n_players`.
 */
enum cw_status cw_sampled_shapley(const double *values,
                                  size_t n_players,
                                  size_t num_permutations,
                                  uint64_t seed,
                                  double *phi_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLAIMWISE_H */
