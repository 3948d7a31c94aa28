#include "service/service.hpp"

#include <algorithm>

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro.
#include <httplib.h>

namespace rbc::service {

using nlohmann::json;

namespace {

std::string required_string(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string())
    throw ServiceError("malformed", 400, std::string("missing string field \"") + key + "\"");
  return body[key].get<std::string>();
}

}  // namespace

GameService::GameService(ServiceOptions options) : options_(std::move(options)), store_(options_.data_dir) {}

std::shared_ptr<GameSession> GameService::session(const std::string& game) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(game);
  if (it == sessions_.end()) {
    if (store_.contains(game)) throw ServiceError("game_finished", 409, "game " + game + " is finished; only its replay is available");
    throw ServiceError("unknown_game", 404, "no game with id " + game);
  }
  return it->second;
}

void GameService::persist_if_finished(GameSession& s) {
  const auto record = s.record();
  if (!record || store_.contains(s.id())) return;
  try {
    store_.put(s.id(), to_json(*record).dump(), result_tag(record->result));
  } catch (const std::invalid_argument&) {
    // Another request stored it first.
  }
}

json GameService::create(const json& body) {
  const GameConfig config = GameConfig::parse(body);
  std::string id;
  {
    std::lock_guard lock(mutex_);
    const auto active = std::count_if(sessions_.begin(), sessions_.end(), [](auto& kv) { return !kv.second || !kv.second->finished(); });
    if (active >= options_.max_games) throw ServiceError("too_many_games", 429, "the server is at its concurrent game limit");
    do {
      id = "g" + std::to_string(++counter_) + "-" + new_token().substr(0, 8);
    } while (sessions_.count(id) || store_.contains(id));
    sessions_[id] = nullptr;  // reserve
  }
  std::shared_ptr<GameSession> s;
  try {
    s = std::make_shared<GameSession>(id, config, agents_);
  } catch (...) {
    std::lock_guard lock(mutex_);
    sessions_.erase(id);
    throw;
  }
  {
    std::lock_guard lock(mutex_);
    sessions_[id] = s;
  }
  persist_if_finished(*s);
  json tokens = json::object();
  const auto issued = s->creation_tokens();
  if (issued[0]) tokens["white"] = *issued[0];
  if (issued[1]) tokens["black"] = *issued[1];
  json out = s->summary();
  out["protocol"] = kProtocolVersion;
  out["type"] = "create";
  out["tokens"] = tokens;
  return out;
}

json GameService::join(const std::string& game, const json& body) {
  const std::string color = required_string(body, "color");
  if (color != "white" && color != "black") throw ServiceError("malformed", 400, "color must be \"white\" or \"black\"");
  auto s = session(game);
  const std::string token = s->join(color == "white" ? Color::White : Color::Black);
  return {{"protocol", kProtocolVersion}, {"type", "join"}, {"game", game}, {"seat", color}, {"token", token}};
}

json GameService::state(const std::string& game, const std::string& token, std::size_t since, int wait_ms) {
  return session(game)->state(token, since, std::clamp(wait_ms, 0, options_.max_wait_ms));
}

json GameService::sense(const std::string& game, const json& body) {
  auto s = session(game);
  return s->sense(required_string(body, "token"), required_string(body, "square"));
}

json GameService::move(const std::string& game, const json& body) {
  auto s = session(game);
  json reply = s->move(required_string(body, "token"), required_string(body, "move"));
  persist_if_finished(*s);
  return reply;
}

std::string GameService::replay(const std::string& game, const std::optional<std::string>& token) {
  if (auto stored = store_.get(game)) return *stored;
  return session(game)->replay(token).dump();
}

json GameService::list() {
  json games = json::array();
  std::vector<std::shared_ptr<GameSession>> live;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, s] : sessions_)
      if (s) live.push_back(s);
  }
  for (const auto& s : live) games.push_back(s->summary());
  for (const auto& g : store_.list()) {
    const bool in_memory = std::any_of(live.begin(), live.end(), [&](const auto& s) { return s->id() == g.id; });
    if (!in_memory) games.push_back({{"game", g.id}, {"phase", "finished"}, {"result", g.result}});
  }
  return {{"protocol", kProtocolVersion}, {"type", "list"}, {"games", games}};
}

std::unique_ptr<httplib::Server> make_http_server(GameService& service) {
  auto server = std::make_unique<httplib::Server>();

  // Bearer header first, then the body or query field.
  auto token_of = [](const httplib::Request& req) -> std::optional<std::string> {
    const auto auth = req.get_header_value("Authorization");
    if (auth.rfind("Bearer ", 0) == 0) return auth.substr(7);
    if (req.has_param("token")) return req.get_param_value("token");
    return std::nullopt;
  };
  auto body_of = [token_of](const httplib::Request& req) {
    json body = req.body.empty() ? json::object() : json::parse(req.body);
    if (body.is_object() && !body.contains("token"))
      if (auto t = token_of(req)) body["token"] = *t;
    return body;
  };
  auto send = [](httplib::Response& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  };
  // Wraps a handler so that errors become error messages with a status.
  auto guarded = [send](auto handler) {
    return [send, handler](const httplib::Request& req, httplib::Response& res) {
      const std::string game = req.matches.size() > 1 ? std::string(req.matches[1]) : std::string();
      try {
        handler(req, res, game);
      } catch (const ServiceError& e) {
        send(res, error_message(e, game), e.status());
      } catch (const json::exception& e) {
        send(res, error_message(ServiceError("malformed", 400, std::string("bad JSON: ") + e.what()), game), 400);
      } catch (const std::exception& e) {
        send(res, error_message(ServiceError("internal", 500, e.what()), game), 500);
      }
    };
  };

  server->set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server->Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
  server->Get("/api/games", guarded([&service, send](const httplib::Request&, httplib::Response& res, const std::string&) {
    send(res, service.list());
  }));
  server->Post("/api/games", guarded([&service, send, body_of](const httplib::Request& req, httplib::Response& res, const std::string&) {
    send(res, service.create(body_of(req)), 201);
  }));
  server->Post(R"(/api/games/([\w-]+)/join)", guarded([&service, send, body_of](const httplib::Request& req, httplib::Response& res, const std::string& game) {
    send(res, service.join(game, body_of(req)));
  }));
  server->Get(R"(/api/games/([\w-]+)/state)", guarded([&service, send, token_of](const httplib::Request& req, httplib::Response& res, const std::string& game) {
    const auto token = token_of(req);
    if (!token) throw ServiceError("bad_token", 403, "a seat token is required");
    std::size_t since = 0;
    int wait = 0;
    try {
      if (req.has_param("since")) since = std::stoul(req.get_param_value("since"));
      if (req.has_param("wait_ms")) wait = std::stoi(req.get_param_value("wait_ms"));
    } catch (const std::exception&) {
      throw ServiceError("malformed", 400, "since and wait_ms must be integers");
    }
    send(res, service.state(game, *token, since, wait));
  }));
  server->Post(R"(/api/games/([\w-]+)/sense)", guarded([&service, send, body_of](const httplib::Request& req, httplib::Response& res, const std::string& game) {
    send(res, service.sense(game, body_of(req)));
  }));
  server->Post(R"(/api/games/([\w-]+)/move)", guarded([&service, send, body_of](const httplib::Request& req, httplib::Response& res, const std::string& game) {
    send(res, service.move(game, body_of(req)));
  }));
  server->Get(R"(/api/games/([\w-]+)/replay)", guarded([&service, token_of](const httplib::Request& req, httplib::Response& res, const std::string& game) {
    res.set_content(service.replay(game, token_of(req)), "application/json");
  }));
  return server;
}

}  // namespace rbc::service
