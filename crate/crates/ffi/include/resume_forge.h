/* SPDX-License-Identifier: Apache-2.0 */

#ifndef RESUME_FORGE_H
#define RESUME_FORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RfStatus {
  RF_STATUS_OK = 0,
  RF_STATUS_NULL_ARGUMENT = 1,
  RF_STATUS_INVALID_ARGUMENT = 2,
  RF_STATUS_IO = 3,
  RF_STATUS_CORRUPT = 4,
  RF_STATUS_NOT_FOUND = 5,
  RF_STATUS_STORAGE = 6,
  RF_STATUS_TRAINING = 7,
  RF_STATUS_BUFFER_TOO_SMALL = 8,
  RF_STATUS_PANIC = 9,
} RfStatus;

typedef enum RfVerdict {
  RF_VERDICT_VALID = 0,
  RF_VERDICT_BAD_MAGIC = 1,
  RF_VERDICT_BAD_VERSION = 2,
  RF_VERDICT_CHECKSUM_MISMATCH = 3,
  RF_VERDICT_TRUNCATED = 4,
} RfVerdict;

typedef enum RfRole {
  RF_ROLE_LATEST = 0,
  RF_ROLE_BEST = 1,
} RfRole;

/**
 * A decoded checkpoint.
 */
typedef struct RfCheckpoint RfCheckpoint;

/**
 * Summary of a finished training run.
 */
typedef struct RfReport RfReport;

/**
 * A local filesystem checkpoint store.
 */
typedef struct RfStore RfStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rf_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rf_last_error(void);

/**
 * Checks framing and checksum without decoding.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes; `out` must be writable.
 */
enum RfStatus rf_verify(const uint8_t *bytes, size_t len, enum RfVerdict *out);

/**
 * # Safety
 * `bytes` must point to `len` readable bytes; `out` must be writable.
 */
enum RfStatus rf_checkpoint_decode(const uint8_t *bytes, size_t len, struct RfCheckpoint **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RfStatus rf_checkpoint_read_file(const char *path, struct RfCheckpoint **out);

/**
 * Serialises the checkpoint into `buf`.
 *
 * # Safety
 * `cp` must come from this library; `buf` must have `cap` writable bytes.
 */
enum RfStatus rf_checkpoint_encode(const struct RfCheckpoint *cp,
                                   uint8_t *buf,
                                   size_t cap,
                                   size_t *out_len);

/**
 * Completed epochs, global step and step within the current epoch. Any
 * output pointer may be null.
 *
 * # Safety
 * `cp` must come from this library; non-null outputs must be writable.
 */
enum RfStatus rf_checkpoint_progress(const struct RfCheckpoint *cp,
                                     uint64_t *epoch,
                                     uint64_t *global_step,
                                     uint64_t *step_in_epoch);

/**
 * The recorded best metric and its epoch; `NotFound` when none was kept.
 *
 * # Safety
 * `cp` must come from this library; outputs must be writable.
 */
enum RfStatus rf_checkpoint_best(const struct RfCheckpoint *cp, double *metric, uint64_t *epoch);

/**
 * # Safety
 * `cp` must be null or come from this library, and not be used afterwards.
 */
void rf_checkpoint_free(struct RfCheckpoint *cp);

/**
 * # Safety
 * `dir` must be a NUL-terminated string; `out` must be writable.
 */
enum RfStatus rf_store_open_local(const char *dir, struct RfStore **out);

/**
 * Writes a new generation of `role`. `generation` may be null.
 *
 * # Safety
 * `store` must come from this library; `bytes` must hold `len` bytes.
 */
enum RfStatus rf_store_put(struct RfStore *store,
                           enum RfRole role,
                           const uint8_t *bytes,
                           size_t len,
                           uint64_t *generation);

/**
 * Reads the newest valid generation of `role` into `buf`.
 *
 * # Safety
 * `store` must come from this library; `buf` must have `cap` writable bytes.
 */
enum RfStatus rf_store_get(const struct RfStore *store,
                           enum RfRole role,
                           uint8_t *buf,
                           size_t cap,
                           size_t *out_len);

/**
 * # Safety
 * `store` must be null or come from this library, and not be used afterwards.
 */
void rf_store_free(struct RfStore *store);

/**
 * One sample's loss. `huber_delta` is read only for `"huber"`.
 *
 * # Safety
 * `prediction` and `target` must each hold `n` values; `out` must be writable.
 */
enum RfStatus rf_loss_eval(const char *name,
                           double huber_delta,
                           const double *prediction,
                           const double *target,
                           size_t n,
                           double *out);

/**
 * Gradient of [`rf_loss_eval`] with respect to the prediction.
 *
 * # Safety
 * `prediction`, `target` and `gradient` must each hold `n` values.
 */
enum RfStatus rf_loss_gradient(const char *name,
                               double huber_delta,
                               const double *prediction,
                               const double *target,
                               size_t n,
                               double *gradient);

/**
 * Trains (or resumes, when `resume` is true) the run described by a config
 * file. `store` overrides the file's backend and may be null, in which case
 * the file or the `RESUME_FORGE_STORE` variable must name one.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum RfStatus rf_train(const char *config_path,
                       const char *store,
                       bool resume,
                       struct RfReport **out);

/**
 * Completed epochs and global step. Either output may be null.
 *
 * # Safety
 * `report` must come from this library; non-null outputs must be writable.
 */
enum RfStatus rf_report_progress(const struct RfReport *report,
                                 uint64_t *epochs,
                                 uint64_t *global_step);

/**
 * Final training loss and accuracy; `NotFound` when no epoch was evaluated.
 *
 * # Safety
 * `report` must come from this library; outputs must be writable.
 */
enum RfStatus rf_report_metrics(const struct RfReport *report, double *loss, double *accuracy);

/**
 * Number of checkpoints this run committed.
 *
 * # Safety
 * `report` must come from this library; `out` must be writable.
 */
enum RfStatus rf_report_checkpoints(const struct RfReport *report, uint64_t *out);

/**
 * # Safety
 * `report` must be null or come from this library, and not be used afterwards.
 */
void rf_report_free(struct RfReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESUME_FORGE_H */
