/* Exercises the C interface from C: a refereed bot game, error reporting,
 * configuration, a batch stage and the server lifecycle. */
#include <pthread.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "rbc/rbc.h"

static int failures = 0;

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: CHECK(%s) failed\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

/* Extracts a quoted string value or null following "key": in flat JSON. */
static int json_square(const char* json, const char* key, char out[3]) {
  char pattern[64];
  snprintf(pattern, sizeof pattern, "\"%s\":", key);
  const char* p = strstr(json, pattern);
  if (!p) return -1;
  p += strlen(pattern);
  if (strncmp(p, "null", 4) == 0) return 0;
  if (p[0] != '"') return -1;
  memcpy(out, p + 1, 2);
  out[2] = '\0';
  return 1;
}

static void play_game(void) {
  rbc_game* game = NULL;
  rbc_player* players[2] = {NULL, NULL};
  CHECK(rbc_game_new(200, &game) == RBC_OK);
  CHECK(rbc_player_new("greedy", 0, 11, &players[0]) == RBC_OK);
  CHECK(rbc_player_new("random", 1, 12, &players[1]) == RBC_OK);

  char notice[2][3] = {"", ""};
  int have_notice[2] = {0, 0};
  int turns = 0;
  for (;;) {
    char* status = NULL;
    CHECK(rbc_game_status(game, &status) == RBC_OK);
    const int over = strstr(status, "\"phase\":\"finished\"") != NULL;
    const int side = strstr(status, "\"to_move\":\"black\"") != NULL;
    rbc_string_free(status);
    if (over || turns > 400) break;

    char square[3], uci[8];
    CHECK(rbc_player_choose_sense(players[side], have_notice[side] ? notice[side] : NULL, square) == RBC_OK);
    have_notice[side] = 0;

    if (turns == 0) {
      size_t count = 0;
      uint32_t buffer[4096];
      CHECK(rbc_player_encode(players[side], 0, NULL, 0, &count) == RBC_ERR_INVALID_ARGUMENT);
      CHECK(count > 0);
      CHECK(rbc_player_encode(players[side], 0, buffer, 4096, &count) == RBC_OK);
      for (size_t i = 0; i < count; ++i) CHECK(buffer[i] < 1800 * 64);
      char* move_json = NULL;
      CHECK(rbc_game_move(game, "e2e4", &move_json) == RBC_ERR_STATE); /* sense first */
      CHECK(strlen(rbc_last_error()) > 0);
      CHECK(move_json == NULL);
    }

    char* sense_json = NULL;
    CHECK(rbc_game_sense(game, square, &sense_json) == RBC_OK);
    CHECK(rbc_player_choose_move(players[side], sense_json, uci) == RBC_OK);
    rbc_string_free(sense_json);

    char* move_json = NULL;
    CHECK(rbc_game_move(game, uci, &move_json) == RBC_OK);
    CHECK(rbc_player_move_result(players[side], move_json) == RBC_OK);
    if (json_square(move_json, "opponent_notice", notice[1 - side]) == 1) have_notice[1 - side] = 1;
    rbc_string_free(move_json);
    ++turns;
  }
  CHECK(turns > 0 && turns <= 400);

  char* status = NULL;
  CHECK(rbc_game_status(game, &status) == RBC_OK);
  CHECK(strstr(status, "\"phase\":\"finished\"") != NULL);
  rbc_string_free(status);
  char* sense_json = NULL;
  CHECK(rbc_game_sense(game, "e4", &sense_json) == RBC_ERR_STATE);

  char* obs = NULL;
  CHECK(rbc_player_observation(players[0], &obs) == RBC_OK);
  CHECK(strstr(obs, "\"own_pieces\"") != NULL);
  rbc_string_free(obs);

  rbc_player_free(players[0]);
  rbc_player_free(players[1]);
  rbc_game_free(game);
}

static void errors(void) {
  rbc_game* game = NULL;
  CHECK(rbc_game_new(0, &game) == RBC_ERR_INVALID_ARGUMENT);
  CHECK(rbc_game_new(10, NULL) == RBC_ERR_INVALID_ARGUMENT);
  CHECK(rbc_game_new(10, &game) == RBC_OK);
  char* out = NULL;
  CHECK(rbc_game_sense(game, "z9", &out) == RBC_ERR_INVALID_ARGUMENT);
  CHECK(strstr(rbc_last_error(), "z9") != NULL);
  CHECK(rbc_game_sense(game, "e4", &out) == RBC_OK);
  rbc_string_free(out);
  CHECK(rbc_game_move(game, "nonsense", &out) == RBC_ERR_INVALID_ARGUMENT);
  rbc_game_free(game);

  rbc_player* p = NULL;
  CHECK(rbc_player_new("wizard", 0, 1, &p) == RBC_ERR_INVALID_ARGUMENT);
  CHECK(rbc_player_new("random", 2, 1, &p) == RBC_ERR_INVALID_ARGUMENT);
  CHECK(rbc_player_new("net:/no/such.ckpt", 0, 1, &p) == RBC_ERR_MISSING_INPUT);
  CHECK(p == NULL);
  CHECK(strcmp(rbc_status_name(RBC_ERR_VALIDATION), "validation") == 0);
  CHECK(strlen(rbc_version()) > 0);
}

static void config_and_stage(void) {
  char* defaults = NULL;
  CHECK(rbc_config_defaults(&defaults) == RBC_OK);
  CHECK(strstr(defaults, "\"sl_checkpoint\"") != NULL);
  rbc_string_free(defaults);

  const char* bad[] = {"{\"sl\": {\"epoch\": 2}}"};
  char* resolved = NULL;
  CHECK(rbc_config_resolve(bad, 1, &resolved) == RBC_ERR_CONFIG);
  CHECK(strstr(rbc_last_error(), "sl.epoch") != NULL);
  const char* good[] = {"{\"seed\": 5}", "{\"seed\": 6, \"arena\": {\"games\": 4}}"};
  CHECK(rbc_config_resolve(good, 2, &resolved) == RBC_OK);
  CHECK(strstr(resolved, "\"seed\": 6") != NULL);
  rbc_string_free(resolved);

  char* report = NULL;
  const char* arena = "{\"output_dir\": \"capi_arena\", \"arena\": {\"a\": \"greedy\", \"b\": \"random\", \"games\": 20}}";
  CHECK(rbc_run_stage("arena", arena, NULL, NULL, &report) == RBC_OK);
  CHECK(report && strstr(report, "\"wilson95\"") != NULL);
  rbc_string_free(report);
  CHECK(rbc_run_stage("train-rl", "{\"output_dir\": \"capi_rl\"}", NULL, NULL, &report) == RBC_ERR_MISSING_INPUT);
  CHECK(report == NULL);
  CHECK(strstr(rbc_last_error(), "sl_checkpoint") != NULL);
  CHECK(rbc_run_stage("fly", "{}", NULL, NULL, &report) == RBC_ERR_CONFIG);
  CHECK(rbc_run_stage("arena", "[1]", NULL, NULL, &report) == RBC_ERR_CONFIG);
}

static void* serve(void* server) {
  return (void*)(intptr_t)rbc_server_run((rbc_server*)server);
}

static void server_lifecycle(void) {
  rbc_server* server = NULL;
  const char* config = "{\"output_dir\": \"capi_serve\", \"service\": {\"port\": 0, \"data_dir\": \"capi_serve/data\"}}";
  CHECK(rbc_server_new(config, &server) == RBC_OK);
  int port = 0;
  CHECK(rbc_server_bind(server, &port) == RBC_OK);
  CHECK(port > 0);
  CHECK(rbc_server_bind(server, &port) == RBC_ERR_STATE);
  pthread_t thread;
  pthread_create(&thread, NULL, serve, server);
  rbc_server_stop(server);
  void* result = NULL;
  pthread_join(thread, &result);
  CHECK((intptr_t)result == RBC_OK);
  rbc_server_free(server);
  CHECK(rbc_server_new("{\"service\": {\"port\": 70000}}", &server) == RBC_ERR_CONFIG);
}

int main(void) {
  play_game();
  errors();
  config_and_stage();
  server_lifecycle();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("C API: all checks passed\n");
  return 0;
}
