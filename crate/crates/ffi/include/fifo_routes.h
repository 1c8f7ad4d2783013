#ifndef FIFO_ROUTES_H
#define FIFO_ROUTES_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum FifoStatus {
  FIFO_STATUS_OK = 0,
  FIFO_STATUS_NULL_ARGUMENT = 1,
  FIFO_STATUS_INVALID_UTF8 = 2,
  FIFO_STATUS_IO = 3,
  FIFO_STATUS_INVALID_INPUT = 4,
  FIFO_STATUS_INVALID_SPEC = 5,
  FIFO_STATUS_SOLVER_REFUSED = 6,
  FIFO_STATUS_PANIC = 255,
} FifoStatus;

typedef enum FifoAlgorithm {
  FIFO_ALGORITHM_OPTIMAL = 0,
  FIFO_ALGORITHM_GREEDY = 1,
  FIFO_ALGORITHM_TRIVIAL = 2,
  FIFO_ALGORITHM_BRUTE = 3,
} FifoAlgorithm;

// A route partition, with its optimality certificate when it has one.
typedef struct FifoPartition FifoPartition;

// An immutable timetable.
typedef struct FifoTimetable FifoTimetable;

// Synthetic timetable parameters, mirroring `GeneratorSpec`.
typedef struct FifoGeneratorSpec {
  size_t num_sequences;
  size_t trips_per_sequence;
  size_t stops_per_sequence;
  uint32_t headway_seconds;
  uint32_t jitter_seconds;
  double overtake_probability;
  uint64_t rng_seed;
} FifoGeneratorSpec;

// Outcome of [`fifo_verify`].
typedef struct FifoVerification {
  bool valid;
  size_t violations;
  // -1 when the partition carries no certificate, else 0 or 1.
  int32_t certificate_valid;
} FifoVerification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a call that
// returned `Ok`.
// The pointer stays valid until the next call into the library on this
// thread. Do not free it.
const char *fifo_last_error(void);

// Parses a timetable document.
//
// # Safety
// `json` must be null or NUL-terminated; `out` must be null or writable.
enum FifoStatus fifo_timetable_from_json(const char *json, struct FifoTimetable **out);

// Reads a timetable file written by `fifo_timetable_to_json` or the CLI.
//
// # Safety
// `path` must be null or NUL-terminated; `out` must be null or writable.
enum FifoStatus fifo_timetable_load(const char *path, struct FifoTimetable **out);

// Loads a GTFS directory. `dropped`, when non-null, receives the number of
// trips skipped for bad data.
//
// # Safety
// `dir` must be null or NUL-terminated; `out` must be null or writable;
// `dropped` must be null or writable.
enum FifoStatus fifo_timetable_load_gtfs(const char *dir,
                                         struct FifoTimetable **out,
                                         size_t *dropped);

// Builds a seeded synthetic timetable.
//
// # Safety
// `spec` must be null or readable; `out` must be null or writable.
enum FifoStatus fifo_timetable_generate(const struct FifoGeneratorSpec *spec,
                                        struct FifoTimetable **out);

// # Safety
// `tt` must be null or a live timetable handle.
size_t fifo_timetable_trip_count(const struct FifoTimetable *tt);

// Serializes a timetable to its canonical document.
//
// # Safety
// `tt` must be null or a live timetable handle; `out` must be null or
// writable.
enum FifoStatus fifo_timetable_to_json(const struct FifoTimetable *tt, char **out);

// # Safety
// `tt` must be null or a handle not yet freed.
void fifo_timetable_free(struct FifoTimetable *tt);

// Partitions the timetable's trips into routes. `brute_limit` caps the
// group size the brute-force solver accepts and is ignored otherwise.
//
// # Safety
// `tt` must be null or a live timetable handle; `out` must be null or
// writable.
enum FifoStatus fifo_solve(const struct FifoTimetable *tt,
                           enum FifoAlgorithm algorithm,
                           size_t brute_limit,
                           struct FifoPartition **out);

// Parses an assignment document (JSON or CSV).
//
// # Safety
// `text` must be null or NUL-terminated; `out` must be null or writable.
enum FifoStatus fifo_partition_parse(const char *text, struct FifoPartition **out);

// # Safety
// `p` must be null or a live partition handle.
size_t fifo_partition_route_count(const struct FifoPartition *p);

// # Safety
// `p` must be null or a live partition handle; `out` must be null or
// writable.
enum FifoStatus fifo_partition_to_json(const struct FifoPartition *p, char **out);

// # Safety
// `p` must be null or a live partition handle; `out` must be null or
// writable.
enum FifoStatus fifo_partition_to_csv(const struct FifoPartition *p, char **out);

// # Safety
// `p` must be null or a handle not yet freed.
void fifo_partition_free(struct FifoPartition *p);

// Checks that `p` covers `tt` with overtaking-free routes, and checks the
// certificate when present. A failed check is not an error: the status is
// `Ok` and `out.valid` is false.
//
// # Safety
// `tt` and `p` must be null or live handles; `out` must be null or
// writable.
enum FifoStatus fifo_verify(const struct FifoTimetable *tt,
                            const struct FifoPartition *p,
                            struct FifoVerification *out);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void fifo_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIFO_ROUTES_H */
