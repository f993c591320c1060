#ifndef HAZARD_H
#define HAZARD_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Return code of every fallible call. Zero is success.
 */
typedef enum HazardStatus {
  HAZARD_STATUS_OK = 0,
  HAZARD_STATUS_NULL_POINTER = 1,
  HAZARD_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed or invalid scene, or bad argument value.
   */
  HAZARD_STATUS_INVALID_INPUT = 3,
  /**
   * The simulation failed, e.g. a non-finite force.
   */
  HAZARD_STATUS_SIMULATION = 4,
  HAZARD_STATUS_OUT_OF_RANGE = 5,
  /**
   * Output buffer too small; the required size is reported.
   */
  HAZARD_STATUS_BUFFER_TOO_SMALL = 6,
  HAZARD_STATUS_PANIC = 7,
} HazardStatus;

/**
 * A running simulation world.
 */
typedef struct HazardWorld HazardWorld;

/**
 * Per-object state copied out of a world.
 */
typedef struct HazardObjectState {
  uint32_t id;
  double x;
  double y;
  double z;
  double temperature;
  /**
   * 0 normal, 1 burning, 2 burnt.
   */
  uint32_t status;
  bool damaged;
  bool is_target;
  bool rescued;
  bool lost;
} HazardObjectState;

/**
 * Outcome of one full episode.
 */
typedef struct HazardEpisodeSummary {
  uint32_t rescues;
  uint32_t damaged_rescues;
  double rescued_value;
  double total_value;
  uint64_t frames_used;
  uint64_t frame_limit;
} HazardEpisodeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *hazard_last_error(void);

/**
 * Static, NUL-terminated crate version.
 */
const char *hazard_version(void);

/**
 * Builds a world from scene JSON with default parameters and the builtin
 * category pool.
 *
 * # Safety
 * `scene_json` must be a NUL-terminated string; `out` must be writable.
 */
enum HazardStatus hazard_world_new(const char *scene_json, struct HazardWorld **out);

/**
 * Releases a world. Null is ignored.
 *
 * # Safety
 * `world` must come from `hazard_world_new` and not be used afterwards.
 */
void hazard_world_free(struct HazardWorld *world);

/**
 * Advances the world by `frames` frames.
 *
 * # Safety
 * `world` must be a live handle.
 */
enum HazardStatus hazard_world_step(struct HazardWorld *world, uint64_t frames);

/**
 * Frames simulated so far.
 *
 * # Safety
 * `world` must be a live handle; `out` must be writable.
 */
enum HazardStatus hazard_world_frame(const struct HazardWorld *world, uint64_t *out);

/**
 * Number of objects in the world.
 *
 * # Safety
 * `world` must be a live handle; `out` must be writable.
 */
enum HazardStatus hazard_world_object_count(const struct HazardWorld *world, size_t *out);

/**
 * State of the object at `index` (scene order).
 *
 * # Safety
 * `world` must be a live handle; `out` must be writable.
 */
enum HazardStatus hazard_world_object(const struct HazardWorld *world,
                                      size_t index,
                                      struct HazardObjectState *out);

/**
 * Copies the world's state digest (hex, NUL-terminated) into `buf`. On
 * `BufferTooSmall`, `needed` holds the required size including the NUL.
 *
 * # Safety
 * `world` must be a live handle; `buf` must hold `len` bytes; `needed` may be null.
 */
enum HazardStatus hazard_world_digest(const struct HazardWorld *world,
                                      char *buf,
                                      size_t len,
                                      size_t *needed);

/**
 * Runs one episode of `agent` ("random", "rule", "greedy", "mcts" or
 * "llm"; the LLM uses the offline greedy-echo backend) on the scene.
 * `frame_limit` zero selects the task default.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum HazardStatus hazard_run_episode(const char *scene_json,
                                     const char *agent,
                                     uint64_t seed,
                                     uint64_t frame_limit,
                                     struct HazardEpisodeSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAZARD_H */
