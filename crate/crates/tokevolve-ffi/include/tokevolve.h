#ifndef TOKEVOLVE_H
#define TOKEVOLVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum TokevolveStatus {
  TokevolveStatus_Ok = 0,
  TokevolveStatus_NullArgument = 1,
  TokevolveStatus_InvalidUtf8 = 2,
  TokevolveStatus_Io = 3,
  TokevolveStatus_InvalidData = 4,
  TokevolveStatus_IdOutOfRange = 5,
  TokevolveStatus_MergeConflict = 6,
  TokevolveStatus_InvalidConfig = 7,
} TokevolveStatus;

/**
 * Opaque tokenizer handle.
 */
typedef struct TokevolveTokenizer TokevolveTokenizer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last error on this thread, or NULL if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *tokevolve_last_error(void);

/**
 * Load a tokenizer from a directory holding `vocab.json` and `merges.txt`.
 *
 * # Safety
 * `dir` must be a valid NUL-terminated string; `out` must be a valid
 * pointer.
 */
enum TokevolveStatus tokevolve_tokenizer_load(const char *dir, struct TokevolveTokenizer **out);

/**
 * Train a tokenizer on newline-separated plain-text documents.
 *
 * # Safety
 * `corpus` must be a valid NUL-terminated string; `out` must be valid.
 */
enum TokevolveStatus tokevolve_tokenizer_train(const char *corpus,
                                               uintptr_t vocab_size,
                                               uint64_t min_pair_frequency,
                                               struct TokevolveTokenizer **out);

/**
 * Write `vocab.json`, `merges.txt` and `special_tokens.json` to `dir`.
 *
 * # Safety
 * `tokenizer` must be a live handle; `dir` a valid string.
 */
enum TokevolveStatus tokevolve_tokenizer_save(const struct TokevolveTokenizer *tokenizer,
                                              const char *dir);

/**
 * # Safety
 * `tokenizer` must come from this library and not be freed twice.
 */
void tokevolve_tokenizer_free(struct TokevolveTokenizer *tokenizer);

/**
 * # Safety
 * `tokenizer` must be a live handle or NULL.
 */
uintptr_t tokevolve_vocab_size(const struct TokevolveTokenizer *tokenizer);

/**
 * Number of invariant violations (0 means the tokenizer is well formed).
 *
 * # Safety
 * `tokenizer` must be a live handle or NULL.
 */
uintptr_t tokevolve_validate(const struct TokevolveTokenizer *tokenizer);

/**
 * Encode UTF-8 text to token ids. `*out_ids` receives a caller-owned
 * buffer of `*out_len` ids; release it with `tokevolve_ids_free`.
 *
 * # Safety
 * All pointers must be valid; `text` NUL-terminated.
 */
enum TokevolveStatus tokevolve_encode(const struct TokevolveTokenizer *tokenizer,
                                      const char *text,
                                      uint32_t **out_ids,
                                      uintptr_t *out_len);

/**
 * # Safety
 * `ids`/`len` must be exactly as returned by `tokevolve_encode`.
 */
void tokevolve_ids_free(uint32_t *ids, uintptr_t len);

/**
 * Decode token ids to text (special tokens skipped). `*out_text`
 * receives a caller-owned NUL-terminated string; release it with
 * `tokevolve_string_free`.
 *
 * # Safety
 * `ids` must point to `len` valid ids; out pointers must be valid.
 */
enum TokevolveStatus tokevolve_decode(const struct TokevolveTokenizer *tokenizer,
                                      const uint32_t *ids,
                                      uintptr_t len,
                                      char **out_text);

/**
 * # Safety
 * `text` must come from this library and not be freed twice.
 */
void tokevolve_string_free(char *text);

/**
 * Merge `new` into `old`; the result keeps every old token id and adds
 * the genuinely new tokens at the end. `*out_added` (optional) receives
 * the number of added tokens.
 *
 * # Safety
 * `old` and `new` must be live handles; `out` must be valid.
 */
enum TokevolveStatus tokevolve_merge(const struct TokevolveTokenizer *old,
                                     const struct TokevolveTokenizer *new_,
                                     struct TokevolveTokenizer **out,
                                     uintptr_t *out_added);

/**
 * Split newline-separated documents into sentences and pack them into
 * chunks of at most `max_tokens` tokens, returned as JSONL (one chunk
 * object per line). Release the string with `tokevolve_string_free`.
 *
 * # Safety
 * `tokenizer` must be a live handle; `corpus` a valid string; `out_jsonl`
 * a valid pointer.
 */
enum TokevolveStatus tokevolve_pack(const struct TokevolveTokenizer *tokenizer,
                                    const char *corpus,
                                    uintptr_t max_tokens,
                                    char **out_jsonl);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TOKEVOLVE_H */
