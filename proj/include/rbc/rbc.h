/*
 * C interface to the RBC engine, agents, training stages and game server.
 *
 * Conventions
 *   - Every fallible call returns rbc_status. On failure rbc_last_error()
 *     describes the problem; the text stays valid until the next call on
 *     the same thread.
 *   - Strings returned through char** are allocated by the library and
 *     must be released with rbc_string_free.
 *   - Handles are opaque. A handle may be used from one thread at a time,
 *     except rbc_server_stop, which may be called from any thread.
 *   - Squares are "a1".."h8", moves are UCI ("e2e4", "e7e8q") or "pass",
 *     colours are 0 (white) and 1 (black).
 */
#ifndef RBC_RBC_H
#define RBC_RBC_H

#include <stddef.h>
#include <stdint.h>

#if defined(RBC_BUILDING_LIBRARY)
#define RBC_API __attribute__((visibility("default")))
#else
#define RBC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rbc_status {
  RBC_OK = 0,
  RBC_ERR_INVALID_ARGUMENT = 1, /* null handle, malformed square, move or JSON */
  RBC_ERR_CONFIG = 2,           /* configuration key or value rejected */
  RBC_ERR_MISSING_INPUT = 3,    /* a required file or setting is absent */
  RBC_ERR_VALIDATION = 4,       /* inputs were read but failed checks; a report is still returned */
  RBC_ERR_STATE = 5,            /* call out of order, e.g. a move before the sense or after the game ended */
  RBC_ERR_IO = 6,
  RBC_ERR_INTERNAL = 7
} rbc_status;

RBC_API const char* rbc_version(void);
RBC_API const char* rbc_last_error(void);
RBC_API const char* rbc_status_name(rbc_status status);
RBC_API void rbc_string_free(char* s);

/* ---- configuration ------------------------------------------------------ */

/* The full default configuration document. */
RBC_API rbc_status rbc_config_defaults(char** out_json);
/* Merges JSON objects onto the defaults, later layers winning, and checks
 * every section. Unknown keys are errors. */
RBC_API rbc_status rbc_config_resolve(const char* const* layers, size_t n_layers, char** out_json);

/* ---- batch stages --------------------------------------------------------- */

/* Receives one JSON object per progress event. */
typedef void (*rbc_log_fn)(const char* event_json, void* user);

/* Runs "gen-data", "validate-data", "train-sl", "train-rl", "arena" or
 * "gradcheck" with a configuration (resolved here if it is partial). Writes
 * the stage outputs and manifest.json under the configured output directory.
 * On RBC_OK and RBC_ERR_VALIDATION *out_report holds the JSON report;
 * otherwise it is set to NULL. */
RBC_API rbc_status rbc_run_stage(const char* stage, const char* config_json, rbc_log_fn log, void* user, char** out_report);

/* ---- game server ---------------------------------------------------------- */

typedef struct rbc_server rbc_server;

/* Uses the "service" section (host, port, data_dir, max_games). */
RBC_API rbc_status rbc_server_new(const char* config_json, rbc_server** out);
/* Binds the configured address; port 0 picks a free port. */
RBC_API rbc_status rbc_server_bind(rbc_server* server, int* out_port);
/* Serves until rbc_server_stop. Binds first if needed. */
RBC_API rbc_status rbc_server_run(rbc_server* server);
RBC_API void rbc_server_stop(rbc_server* server);
RBC_API void rbc_server_free(rbc_server* server);

/* ---- referee -------------------------------------------------------------- */

typedef struct rbc_game rbc_game;

RBC_API rbc_status rbc_game_new(int turn_cap, rbc_game** out);
RBC_API void rbc_game_free(rbc_game* game);
/* Sense for the side to move:
 *   {"center": sq, "revealed": [[sq, piece|null], ...]} */
RBC_API rbc_status rbc_game_sense(rbc_game* game, const char* square, char** out_json);
/* Move for the side to move, after its sense:
 *   {"requested", "taken", "capture_square", "was_illegal",
 *    "opponent_notice": square the opponent learns it lost a piece on, or null} */
RBC_API rbc_status rbc_game_move(rbc_game* game, const char* uci, char** out_json);
/* {"to_move", "phase", "turn", "result": null|"white"|"black"|"draw", "reason", "fen"}.
 * The FEN is ground truth; do not show it to players before the game ends. */
RBC_API rbc_status rbc_game_status(const rbc_game* game, char** out_json);

/* ---- players -------------------------------------------------------------- */

typedef struct rbc_player rbc_player;

/* A bot that sees only its own observations. Spec: "random", "greedy" or
 * "net:<checkpoint>[@argmax|@sample=T][,mask]". */
RBC_API rbc_status rbc_player_new(const char* bot_spec, int color, uint64_t seed, rbc_player** out);
RBC_API void rbc_player_free(rbc_player* player);
/* Starts the player's turn with the opponent's capture notice (NULL if
 * none) and returns its sense square. */
RBC_API rbc_status rbc_player_choose_sense(rbc_player* player, const char* opp_capture, char out_square[3]);
/* Feeds the JSON from rbc_game_sense and returns the chosen move. */
RBC_API rbc_status rbc_player_choose_move(rbc_player* player, const char* sense_json, char out_uci[8]);
/* Feeds the JSON from rbc_game_move, completing the turn. */
RBC_API rbc_status rbc_player_move_result(rbc_player* player, const char* move_json);
/* The player's current observation frame in canonical JSON. */
RBC_API rbc_status rbc_player_observation(const rbc_player* player, char** out_json);
/* Active entries of the 1800x8x8 network input (index = plane * 64 +
 * square) at stage 0 (before sensing) or 1 (before moving). *out_count
 * receives the full count even when capacity is too small, in which case
 * RBC_ERR_INVALID_ARGUMENT is returned. */
RBC_API rbc_status rbc_player_encode(const rbc_player* player, int stage, uint32_t* out_active, size_t capacity, size_t* out_count);

#ifdef __cplusplus
}
#endif

#endif /* RBC_RBC_H */
