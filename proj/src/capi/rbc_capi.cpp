#include "rbc/rbc.h"

#include <atomic>
#include <cstring>
#include <mutex>
#include <string>

#include "app/stages.hpp"
#include "encoding/observation_json.hpp"
#include "util/runtime.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro.
#include <httplib.h>

using nlohmann::json;
using namespace rbc;

struct rbc_server {
  json config;
  std::unique_ptr<service::GameService> service;
  std::unique_ptr<httplib::Server> http;
  std::atomic<bool> bound{false};
  std::atomic<bool> stop_requested{false};
};

struct rbc_game {
  GroundState state;
  bool sensed = false;
};

struct rbc_player {
  arena::BotFactory factory;
  std::unique_ptr<Agent> agent;
  enc::PlayerView view;
  rbc_player(Color c) : view(c) {}
};

namespace {

thread_local std::string last_error;

rbc_status fail(rbc_status s, const std::string& message) {
  last_error = message;
  return s;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs `body`, mapping exceptions onto status codes.
template <typename F>
rbc_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const app::MissingInput& e) {
    return fail(RBC_ERR_MISSING_INPUT, e.what());
  } catch (const app::ConfigError& e) {
    return fail(RBC_ERR_CONFIG, e.what());
  } catch (const json::exception& e) {
    return fail(RBC_ERR_INVALID_ARGUMENT, std::string("bad JSON: ") + e.what());
  } catch (const MalformedInput& e) {
    return fail(RBC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const enc::OrderError& e) {
    return fail(RBC_ERR_STATE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(RBC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RBC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(RBC_ERR_INTERNAL, e.what());
  }
}

#define RBC_REQUIRE(cond, what) \
  if (!(cond)) return fail(RBC_ERR_INVALID_ARGUMENT, what)

json parse_object(const char* text, const char* what) {
  json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + " must be a JSON object");
  return j;
}

json square_or_null(const std::optional<Square>& s) { return s ? json(s->name()) : json(nullptr); }

std::optional<Square> optional_square(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Square::parse(j.get<std::string>());
}

void copy_out(const std::string& s, char* out, std::size_t cap) {
  if (s.size() + 1 > cap) throw std::logic_error("output buffer too small");
  std::memcpy(out, s.c_str(), s.size() + 1);
}

}  // namespace

extern "C" {

const char* rbc_version(void) { return RBC_CODE_VERSION; }
const char* rbc_last_error(void) { return last_error.c_str(); }
void rbc_string_free(char* s) { std::free(s); }

const char* rbc_status_name(rbc_status status) {
  switch (status) {
    case RBC_OK: return "ok";
    case RBC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case RBC_ERR_CONFIG: return "config";
    case RBC_ERR_MISSING_INPUT: return "missing_input";
    case RBC_ERR_VALIDATION: return "validation";
    case RBC_ERR_STATE: return "state";
    case RBC_ERR_IO: return "io";
    case RBC_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

rbc_status rbc_config_defaults(char** out_json) {
  RBC_REQUIRE(out_json, "out_json is null");
  return guarded([&] {
    *out_json = dup(app::default_config().dump(2));
    return RBC_OK;
  });
}

rbc_status rbc_config_resolve(const char* const* layers, size_t n_layers, char** out_json) {
  RBC_REQUIRE(out_json && (layers || n_layers == 0), "null argument");
  *out_json = nullptr;
  return guarded([&] {
    std::vector<json> parsed;
    for (std::size_t i = 0; i < n_layers; ++i) {
      RBC_REQUIRE(layers[i], "null config layer");
      try {
        parsed.push_back(parse_object(layers[i], "config layer"));
      } catch (const std::exception& e) {
        throw app::ConfigError("config layer " + std::to_string(i) + ": " + e.what());
      }
    }
    *out_json = dup(app::resolve_config(parsed).dump(2));
    return RBC_OK;
  });
}

rbc_status rbc_run_stage(const char* stage, const char* config_json, rbc_log_fn log, void* user, char** out_report) {
  RBC_REQUIRE(stage && config_json && out_report, "null argument");
  *out_report = nullptr;
  return guarded([&] {
    tune_allocator();
    json layer;
    try {
      layer = parse_object(config_json, "config");
    } catch (const std::exception& e) {
      throw app::ConfigError(e.what());
    }
    const json config = app::resolve_config({layer});
    app::LogFn sink;
    if (log) sink = [&](const json& event) { log(event.dump().c_str(), user); };
    try {
      *out_report = dup(app::run_stage(stage, config, sink).dump(2));
    } catch (const app::ValidationFailure& e) {
      *out_report = dup(e.report().dump(2));
      return fail(RBC_ERR_VALIDATION, e.what());
    }
    return RBC_OK;
  });
}

rbc_status rbc_server_new(const char* config_json, rbc_server** out) {
  RBC_REQUIRE(config_json && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<rbc_server>();
    s->config = app::resolve_config({parse_object(config_json, "config")});
    s->service = std::make_unique<service::GameService>(app::service_of(s->config));
    s->http = service::make_http_server(*s->service);
    *out = s.release();
    return RBC_OK;
  });
}

rbc_status rbc_server_bind(rbc_server* server, int* out_port) {
  RBC_REQUIRE(server, "null server");
  return guarded([&] {
    if (server->bound) return fail(RBC_ERR_STATE, "server is already bound");
    const auto& svc = server->config["service"];
    const std::string host = svc["host"];
    int port = svc["port"];
    if (port == 0) port = server->http->bind_to_any_port(host);
    else if (!server->http->bind_to_port(host, port)) port = -1;
    if (port < 0) return fail(RBC_ERR_IO, "cannot bind " + host + ":" + std::to_string(svc["port"].get<int>()));
    server->bound = true;
    const auto dir = app::output_dir_of("serve", server->config);
    std::filesystem::create_directories(dir);
    app::write_manifest(dir, "serve", server->config,
                        {{"status", "running"}, {"port", port}, {"data_dir", server->service->options().data_dir.string()}});
    if (out_port) *out_port = port;
    return RBC_OK;
  });
}

rbc_status rbc_server_run(rbc_server* server) {
  RBC_REQUIRE(server, "null server");
  if (!server->bound) {
    const rbc_status s = rbc_server_bind(server, nullptr);
    if (s != RBC_OK) return s;
  }
  return guarded([&] {
    if (server->stop_requested) return RBC_OK;
    if (!server->http->listen_after_bind() && !server->stop_requested) return fail(RBC_ERR_IO, "server stopped unexpectedly");
    return RBC_OK;
  });
}

void rbc_server_stop(rbc_server* server) {
  if (!server) return;
  server->stop_requested = true;
  server->http->stop();
}

void rbc_server_free(rbc_server* server) { delete server; }

rbc_status rbc_game_new(int turn_cap, rbc_game** out) {
  RBC_REQUIRE(out, "null argument");
  RBC_REQUIRE(turn_cap > 0, "turn_cap must be positive");
  return guarded([&] {
    *out = new rbc_game{initial_state(turn_cap)};
    return RBC_OK;
  });
}

void rbc_game_free(rbc_game* game) { delete game; }

rbc_status rbc_game_sense(rbc_game* game, const char* square, char** out_json) {
  RBC_REQUIRE(game && square && out_json, "null argument");
  *out_json = nullptr;
  return guarded([&] {
    if (game->state.result) return fail(RBC_ERR_STATE, "the game is over");
    if (game->sensed) return fail(RBC_ERR_STATE, "already sensed this turn; move next");
    const SenseOutcome out = apply_sense(game->state, Square::parse(square));
    json revealed = json::array();
    for (const auto& r : out.revealed)
      revealed.push_back({r.square.name(), r.piece ? json(std::string(1, to_fen_char(*r.piece))) : json(nullptr)});
    game->sensed = true;
    *out_json = dup(json{{"center", out.center.name()}, {"revealed", revealed}}.dump());
    return RBC_OK;
  });
}

rbc_status rbc_game_move(rbc_game* game, const char* uci, char** out_json) {
  RBC_REQUIRE(game && uci && out_json, "null argument");
  *out_json = nullptr;
  return guarded([&] {
    if (game->state.result) return fail(RBC_ERR_STATE, "the game is over");
    if (!game->sensed) return fail(RBC_ERR_STATE, "sense before moving");
    const Move m = Move::parse_uci(uci);
    auto [next, out] = request_move(game->state, m);
    const Color opponent = opposite(game->state.side_to_move);
    game->state = std::move(next);
    game->sensed = false;
    *out_json = dup(json{{"requested", m.uci()},
                         {"taken", out.taken_move ? json(out.taken_move->uci()) : json(nullptr)},
                         {"capture_square", square_or_null(out.capture_square)},
                         {"was_illegal", out.was_illegal},
                         {"opponent_notice", square_or_null(capture_notice(out, opponent))}}
                        .dump());
    return RBC_OK;
  });
}

rbc_status rbc_game_status(const rbc_game* game, char** out_json) {
  RBC_REQUIRE(game && out_json, "null argument");
  *out_json = nullptr;
  return guarded([&] {
    const auto& s = game->state;
    json j{{"to_move", s.result ? json(nullptr) : json(s.side_to_move == Color::White ? "white" : "black")},
           {"phase", s.result ? "finished" : (game->sensed ? "awaiting_move" : "awaiting_sense")},
           {"turn", s.fullmove},
           {"result", s.result ? json(result_tag(*s.result)) : json(nullptr)},
           {"reason", s.result ? json(s.result->reason == EndReason::KingCaptured ? "king_captured" : "turn_cap_draw") : json(nullptr)},
           {"fen", to_fen(s)}};
    *out_json = dup(j.dump());
    return RBC_OK;
  });
}

rbc_status rbc_player_new(const char* bot_spec, int color, uint64_t seed, rbc_player** out) {
  RBC_REQUIRE(bot_spec && out, "null argument");
  RBC_REQUIRE(color == 0 || color == 1, "color must be 0 (white) or 1 (black)");
  *out = nullptr;
  return guarded([&] {
    auto p = std::make_unique<rbc_player>(color == 0 ? Color::White : Color::Black);
    const auto spec = arena::BotSpec::parse(bot_spec);
    if (spec.kind == arena::BotSpec::Kind::Net && !std::filesystem::exists(spec.checkpoint))
      return fail(RBC_ERR_MISSING_INPUT, "checkpoint " + spec.checkpoint + " does not exist");
    p->agent = p->factory.make(spec, seed);
    *out = p.release();
    return RBC_OK;
  });
}

void rbc_player_free(rbc_player* player) { delete player; }

rbc_status rbc_player_choose_sense(rbc_player* player, const char* opp_capture, char out_square[3]) {
  RBC_REQUIRE(player && out_square, "null argument");
  return guarded([&] {
    std::optional<Square> cap;
    if (opp_capture) cap = Square::parse(opp_capture);
    player->view.start_turn(cap);
    copy_out(player->agent->choose_sense(player->view).name(), out_square, 3);
    return RBC_OK;
  });
}

rbc_status rbc_player_choose_move(rbc_player* player, const char* sense_json, char out_uci[8]) {
  RBC_REQUIRE(player && sense_json && out_uci, "null argument");
  return guarded([&] {
    const json j = parse_object(sense_json, "sense result");
    SenseOutcome so{Square::parse(j.at("center").get<std::string>()), {}};
    for (const auto& r : j.at("revealed")) {
      std::optional<Piece> piece;
      if (!r.at(1).is_null()) {
        const auto text = r.at(1).get<std::string>();
        piece = text.size() == 1 ? piece_from_fen_char(text[0]) : std::nullopt;
        if (!piece) throw std::invalid_argument("bad piece letter \"" + text + "\"");
      }
      so.revealed.push_back({Square::parse(r.at(0).get<std::string>()), piece});
    }
    player->view.sensed(so);
    copy_out(player->agent->choose_move(player->view).uci(), out_uci, 8);
    return RBC_OK;
  });
}

rbc_status rbc_player_move_result(rbc_player* player, const char* move_json) {
  RBC_REQUIRE(player && move_json, "null argument");
  return guarded([&] {
    const json j = parse_object(move_json, "move result");
    MoveOutcome out;
    out.mover = player->view.color();
    out.requested = Move::parse_uci(j.at("requested").get<std::string>());
    if (!j.at("taken").is_null()) out.taken_move = Move::parse_uci(j.at("taken").get<std::string>());
    out.capture_square = optional_square(j.at("capture_square"));
    out.was_illegal = j.at("was_illegal").get<bool>();
    player->view.moved(out);
    return RBC_OK;
  });
}

rbc_status rbc_player_observation(const rbc_player* player, char** out_json) {
  RBC_REQUIRE(player && out_json, "null argument");
  *out_json = nullptr;
  return guarded([&] {
    *out_json = dup(enc::to_json(player->view.history().current()).dump());
    return RBC_OK;
  });
}

rbc_status rbc_player_encode(const rbc_player* player, int stage, uint32_t* out_active, size_t capacity, size_t* out_count) {
  RBC_REQUIRE(player && out_count, "null argument");
  RBC_REQUIRE(stage == 0 || stage == 1, "stage must be 0 (pre-sense) or 1 (pre-move)");
  RBC_REQUIRE(out_active || capacity == 0, "null output buffer");
  return guarded([&] {
    const auto stack = player->view.stack(stage == 0 ? enc::Stage::PreSense : enc::Stage::PreMove);
    const auto active = stack.active();
    *out_count = active.size();
    if (active.size() > capacity) return fail(RBC_ERR_INVALID_ARGUMENT, "capacity " + std::to_string(capacity) + " < " + std::to_string(active.size()));
    std::copy(active.begin(), active.end(), out_active);
    return RBC_OK;
  });
}

}  // extern "C"
