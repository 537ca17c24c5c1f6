#ifndef SEMPLAN_H
#define SEMPLAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SemplanStatus {
  SEMPLAN_STATUS_OK = 0,
  SEMPLAN_STATUS_NULL_ARGUMENT = 1,
  SEMPLAN_STATUS_INVALID_UTF8 = 2,
  SEMPLAN_STATUS_PARSE_ERROR = 3,
  SEMPLAN_STATUS_VALIDATION_ERROR = 4,
  SEMPLAN_STATUS_UNKNOWN_DOOR = 5,
  SEMPLAN_STATUS_UNKNOWN_FURNITURE = 6,
  SEMPLAN_STATUS_OUTSIDE_ARENA = 7,
  SEMPLAN_STATUS_NO_PATH = 8,
  SEMPLAN_STATUS_INDEX_OUT_OF_RANGE = 9,
  SEMPLAN_STATUS_UNRESOLVED_AMBIGUITY = 10,
  SEMPLAN_STATUS_PLANNING_FAILED = 11,
  SEMPLAN_STATUS_PANIC = 99,
} SemplanStatus;

// Opaque map handle.
typedef struct SemplanMap SemplanMap;

// Opaque path handle.
typedef struct SemplanPath SemplanPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failed call on this thread, or null.
//
// The pointer stays valid until the next failing call on the same thread.
const char *semplan_last_error(void);

void semplan_string_free(char *s);

// Parses and validates a map document.
enum SemplanStatus semplan_map_from_json(const char *json, struct SemplanMap **out);

void semplan_map_free(struct SemplanMap *map);

// Canonical JSON form of the map.
enum SemplanStatus semplan_map_to_json(const struct SemplanMap *map, char **out);

// Writes `room` or `room/furniture` for the point. Returns
// `SEMPLAN_STATUS_OUTSIDE_ARENA` when no room contains it.
enum SemplanStatus semplan_map_locate(const struct SemplanMap *map, double x, double y, char **out);

// Opens or closes a door on the handle in place.
enum SemplanStatus semplan_map_set_door_passable(struct SemplanMap *map,
                                                 const char *door,
                                                 bool passable);

// Shortest path from a start point to a goal point.
enum SemplanStatus semplan_plan_path(const struct SemplanMap *map,
                                     double start_x,
                                     double start_y,
                                     double goal_x,
                                     double goal_y,
                                     struct SemplanPath **out);

// Shortest path from a start point to the anchor of a piece of furniture.
enum SemplanStatus semplan_plan_path_to_furniture(const struct SemplanMap *map,
                                                  double start_x,
                                                  double start_y,
                                                  const char *furniture,
                                                  struct SemplanPath **out);

// Total length in meters, or NaN for a null handle.
double semplan_path_length(const struct SemplanPath *path);

size_t semplan_path_waypoint_count(const struct SemplanPath *path);

enum SemplanStatus semplan_path_waypoint(const struct SemplanPath *path,
                                         size_t index,
                                         double *x,
                                         double *y);

enum SemplanStatus semplan_path_to_json(const struct SemplanPath *path, char **out);

void semplan_path_free(struct SemplanPath *path);

// Plans a task with a scripted scenario and replays it in the simulator.
//
// `command` may be null to use the scenario's command. `answers` may be null
// or hold newline-separated clarification answers. On success `out` receives
// the JSON report `{command, plan, execution}`.
enum SemplanStatus semplan_plan_task_scripted(const struct SemplanMap *map,
                                              const char *world_json,
                                              const char *scenario_json,
                                              const char *command,
                                              const char *answers,
                                              size_t max_steps,
                                              char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMPLAN_H */
