#pragma once

// Game server: a registry of sessions, persistence of finished games, and
// the HTTP binding. Every handler speaks the versioned JSON wire format
// described in schema/wire.schema.json.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "service/session.hpp"
#include "service/store.hpp"

namespace httplib {
class Server;
}

namespace rbc::service {

struct ServiceOptions {
  std::filesystem::path data_dir = "rbc-data";
  int max_games = 64;       // concurrent unfinished games
  int max_wait_ms = 30000;  // long-poll ceiling
};

class GameService {
 public:
  explicit GameService(ServiceOptions options);

  nlohmann::json create(const nlohmann::json& body);
  nlohmann::json join(const std::string& game, const nlohmann::json& body);
  nlohmann::json state(const std::string& game, const std::string& token, std::size_t since, int wait_ms);
  nlohmann::json sense(const std::string& game, const nlohmann::json& body);
  nlohmann::json move(const std::string& game, const nlohmann::json& body);
  // Serialized body; finished games come back byte-identical from storage.
  std::string replay(const std::string& game, const std::optional<std::string>& token);
  nlohmann::json list();

  const ServiceOptions& options() const { return options_; }

 private:
  std::shared_ptr<GameSession> session(const std::string& game);
  void persist_if_finished(GameSession& s);

  ServiceOptions options_;
  GameStore store_;
  AgentSource agents_;
  std::map<std::string, std::shared_ptr<GameSession>> sessions_;
  std::mutex mutex_;
  std::uint64_t counter_ = 0;
};

// Routes under /api. The caller binds and listens.
std::unique_ptr<httplib::Server> make_http_server(GameService& service);

}  // namespace rbc::service
