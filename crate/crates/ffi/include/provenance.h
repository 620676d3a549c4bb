#ifndef PROVENANCE_H
#define PROVENANCE_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum ProvStatus {
  PROV_STATUS_OK = 0,
  PROV_STATUS_NULL_POINTER = 1,
  PROV_STATUS_INVALID_ARGUMENT = 2,
  PROV_STATUS_INVALID_UTF8 = 3,
  PROV_STATUS_UNINITIALIZED = 4,
  PROV_STATUS_DIMENSION_MISMATCH = 5,
  PROV_STATUS_ZERO_VECTOR = 6,
  PROV_STATUS_NOT_DETERMINABLE = 7,
  PROV_STATUS_DATA_ERROR = 8,
  PROV_STATUS_LEDGER_CORRUPT = 9,
  PROV_STATUS_IO = 10,
  PROV_STATUS_PANIC = 11,
} ProvStatus;

typedef enum ProvMode {
  PROV_MODE_HASH_ONLY = 0,
  PROV_MODE_VECTOR_ONLY = 1,
  PROV_MODE_HYBRID = 2,
} ProvMode;

typedef enum ProvPrediction {
  PROV_PREDICTION_AI = 0,
  PROV_PREDICTION_HUMAN = 1,
  PROV_PREDICTION_UNDETERMINED = 2,
} ProvPrediction;

typedef enum ProvGasMode {
  PROV_GAS_MODE_UINT256 = 0,
  PROV_GAS_MODE_STRING = 1,
} ProvGasMode;

// Opaque engine handle.
typedef struct ProvEngine ProvEngine;

// Fixed-layout classification result. Similarities are meaningful only
// when `has_similarities`; `verified` only when `has_verified`.
typedef struct ProvClassification {
  enum ProvPrediction prediction;
  enum ProvMode mode;
  bool has_similarities;
  double human_similarity;
  double ai_similarity;
  bool has_verified;
  bool verified;
  bool conflict;
} ProvClassification;

typedef struct ProvGasSummary {
  uint64_t count;
  double mean;
  double median;
  uint64_t min;
  uint64_t max;
} ProvGasSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *prov_last_error(void);

// Opens an initialized data root using `<root>/provenance.toml` if present.
//
// # Safety
// `root` must be a NUL-terminated string; `out` must be writable.
enum ProvStatus prov_engine_open(const char *root, struct ProvEngine **out);

// Creates the collections (dimension `dim`) and ledgers under `root`.
//
// # Safety
// As for [`prov_engine_open`].
enum ProvStatus prov_engine_init(const char *root, size_t dim, struct ProvEngine **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `engine` must come from this library and not be used afterwards.
void prov_engine_free(struct ProvEngine *engine);

// # Safety
// `engine` must be a live handle; `out` must be writable.
enum ProvStatus prov_engine_dim(const struct ProvEngine *engine, size_t *out);

// Ingests an embedding file into `collection` (`"ai"` or `"human"`) under
// the configured namespace. `out_count` (nullable) receives the record count.
//
// # Safety
// `engine` must be a live handle; strings NUL-terminated.
enum ProvStatus prov_engine_ingest_file(const struct ProvEngine *engine,
                                        const char *path,
                                        const char *collection,
                                        size_t *out_count);

// Classifies one embedding of `dim` components.
//
// # Safety
// `components` must point to `dim` floats; `out` must be writable.
enum ProvStatus prov_engine_classify(const struct ProvEngine *engine,
                                     const float *components,
                                     size_t dim,
                                     enum ProvMode mode,
                                     struct ProvClassification *out);

// Like [`prov_engine_classify`] but returns the full JSON response,
// including nearest ids. Free the string with [`prov_string_free`].
//
// # Safety
// As for [`prov_engine_classify`]; `out_json` must be writable.
enum ProvStatus prov_engine_classify_json(const struct ProvEngine *engine,
                                          const float *components,
                                          size_t dim,
                                          enum ProvMode mode,
                                          char **out_json);

// # Safety
// `s` must come from this library or be null.
void prov_string_free(char *s);

// SHA-256 of the canonical serialization of a vector.
//
// # Safety
// `components` must point to `dim` floats; `out` to 32 writable bytes.
enum ProvStatus prov_embed_hash(const float *components, size_t dim, uint8_t *out);

// Cosine distance in `[0, 2]`.
//
// # Safety
// `a` and `b` must each point to `dim` floats; `out` must be writable.
enum ProvStatus prov_cosine_distance(const float *a, const float *b, size_t dim, double *out);

// Verifies a ledger file. `first_bad_index` (nullable) receives the first
// defective entry, or -1. A bad header returns `LEDGER_CORRUPT`.
//
// # Safety
// `path` NUL-terminated; `ok` writable.
enum ProvStatus prov_ledger_verify(const char *path, bool *ok, int64_t *first_bad_index);

// Simulates `n` digest stores under the default gas model.
//
// # Safety
// `out` must be writable.
enum ProvStatus prov_gas_simulate(enum ProvGasMode mode,
                                  size_t n,
                                  uint64_t seed,
                                  struct ProvGasSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROVENANCE_H */
