/* C interface to the tensegrity toolkit. Every function returns a tg_status;
 * on failure tg_last_error() holds a message for the calling thread. Handles
 * are opaque and must be released with the matching destroy call. */
#ifndef TENSEGRITY_TENSEGRITY_H
#define TENSEGRITY_TENSEGRITY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TG_BUILDING_LIBRARY)
#define TG_API __declspec(dllexport)
#else
#define TG_API __declspec(dllimport)
#endif
#else
#define TG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tg_status {
  TG_OK = 0,
  TG_INVALID_ARGUMENT = 1,
  TG_OUT_OF_RANGE = 2,
  TG_INTERNAL = 3,
  TG_INFEASIBLE_EQUALITY = 4,
  TG_NOT_PSD = 5,
  TG_MAX_ITERATIONS = 6,
  TG_DEGENERATE_COMMAND = 7,
  TG_SINGULAR_ALLOCATION = 8,
  TG_NOT_ADJACENT = 9,
  TG_DISCONNECTED_GRAPH = 10,
  TG_NO_PATH = 11,
  TG_EXCESSIVE_TIMESTEP = 12,
  TG_TIMEOUT = 13,
  TG_CONFIG = 14,
  TG_IO = 15,
  TG_NULL_POINTER = 16,
  TG_BUFFER_TOO_SMALL = 17
} tg_status;

TG_API const char* tg_status_string(tg_status status);
/* Message of the last failure on this thread; empty after a success. */
TG_API const char* tg_last_error(void);
TG_API const char* tg_version(void);

/* ---- geometry ---- */

typedef struct tg_model tg_model;

TG_API tg_status tg_model_create(double rod_length, tg_model** out);
TG_API void tg_model_destroy(tg_model* model);
/* Node i in 0..11, xyz in metres. */
TG_API tg_status tg_model_node(const tg_model* model, int node, double xyz[3]);
/* Faces are 1..20. */
TG_API tg_status tg_model_face_nodes(const tg_model* model, int face, int nodes[3]);
TG_API tg_status tg_model_face_normal(const tg_model* model, int face, double normal[3]);
/* 3 for a three-string face, 2 for a two-string face. */
TG_API tg_status tg_model_face_strings(const tg_model* model, int face, int* strings);
TG_API tg_status tg_identify_face(const tg_model* model, double pitch, double roll, int* face);

/* ---- sessions: a validated configuration ---- */

typedef struct tg_session tg_session;

TG_API tg_status tg_session_create(const char* config_json, tg_session** out);
TG_API tg_status tg_session_create_from_file(const char* path, tg_session** out);
/* Session with every default. */
TG_API tg_status tg_session_create_default(tg_session** out);
TG_API void tg_session_destroy(tg_session* session);
TG_API tg_status tg_session_set_seed(tg_session* session, uint64_t seed);
TG_API tg_status tg_session_set_output_dir(tg_session* session, const char* dir);
/* Copies a NUL-terminated string into buf. With buf == NULL or a short
 * buffer, *needed receives the size including the terminator and
 * TG_BUFFER_TOO_SMALL is returned (TG_OK when buf is NULL). */
TG_API tg_status tg_session_config_hash(const tg_session* session, char* buf, size_t size,
                                        size_t* needed);
TG_API tg_status tg_session_config_json(const tg_session* session, char* buf, size_t size,
                                        size_t* needed);
TG_API tg_status tg_session_output_dir(const tg_session* session, char* buf, size_t size,
                                       size_t* needed);

/* ---- commands; each writes its files under the session output dir ---- */

typedef struct tg_margins {
  double string_yield;
  double rod_yield;
  double rod_buckling; /* +inf when the demand is zero */
  int string_passed;
  int rod_yield_passed;
  int rod_buckling_passed;
} tg_margins;

typedef struct tg_analysis {
  double total_force;
  double max_tension;
  double max_compression;
  double buckling_stress;
  int cases;
  int passed;
  tg_margins margins;
} tg_analysis;

TG_API tg_status tg_analyze(tg_session* session, tg_analysis* out);

typedef struct tg_plan_summary {
  int start;
  int steps;
  double cost;
  int faces[32]; /* start, then each landing face */
  int face_count;
} tg_plan_summary;

TG_API tg_status tg_plan(tg_session* session, int start_face, tg_plan_summary* out);

typedef enum tg_scenario {
  TG_SCENARIO_REORIENT = 0,
  TG_SCENARIO_FLIGHT_STEP = 1,
  TG_SCENARIO_WALL_IMPACT = 2,
  TG_SCENARIO_MONTE_CARLO = 3
} tg_scenario;

TG_API tg_status tg_scenario_from_name(const char* name, tg_scenario* out);

typedef struct tg_sim_summary {
  tg_scenario scenario;
  int ok;
  /* reorient */
  int reached;
  int followed_plan;
  double time;
  int replans;
  double max_thrust_while_cut;
  /* monte carlo */
  int trials;
  int trials_reached;
  /* flight step; NaN when no estimate */
  double damping;
  double damping_point_mass;
  /* wall impact */
  double impact_force;
  int verdict_passed;
  tg_margins margins;
} tg_sim_summary;

TG_API tg_status tg_simulate(tg_session* session, tg_scenario scenario, int start_face,
                             tg_sim_summary* out);

TG_API tg_status tg_report(tg_session* session, int* files_written);

TG_API tg_status tg_estimate_impact_force(double mass, double speed, double stopping_distance,
                                          double* force);

#ifdef __cplusplus
}
#endif

#endif /* TENSEGRITY_TENSEGRITY_H */
