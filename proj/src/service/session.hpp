#pragma once

// One game on the server. Each seat has an append-only message log holding
// only what that seat is allowed to see; ground truth appears in the log
// only in the final game_over message.

#include <array>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/match.hpp"
#include "game/record.hpp"

namespace rbc::service {

constexpr int kProtocolVersion = 1;

// Carries a stable error code and the HTTP status the transport should use.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(std::string code, int status, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)), status_(status) {}
  const std::string& code() const { return code_; }
  int status() const { return status_; }

 private:
  std::string code_;
  int status_;
};

nlohmann::json error_message(const ServiceError& e, const std::string& game = "");

struct SeatSpec {
  // Human: a token is issued at creation. Open: a remote player claims the
  // seat later with join. Bot: driven by the server.
  enum class Kind { Human, Open, Bot };
  Kind kind = Kind::Human;
  arena::BotSpec bot;

  static SeatSpec parse(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct GameConfig {
  std::array<SeatSpec, 2> seats;
  std::uint64_t seed = 0;
  int turn_cap = kDefaultTurnCap;

  // Unknown keys are ignored; bad values throw ServiceError("invalid_config").
  static GameConfig parse(const nlohmann::json& j);
};

enum class Phase { AwaitingSense, AwaitingMove, Finished };
std::string phase_name(Phase p);

// Creates bot agents; shared by all sessions and safe to call concurrently.
class AgentSource {
 public:
  std::unique_ptr<Agent> make(const arena::BotSpec& spec, std::uint64_t seed);

 private:
  std::mutex mutex_;
  arena::BotFactory factory_;
};

class GameSession {
 public:
  // Bots to move are driven immediately, so a bot-vs-bot game is finished
  // when the constructor returns.
  GameSession(std::string id, const GameConfig& config, AgentSource& agents);

  const std::string& id() const { return id_; }
  // Tokens issued at creation, by colour (human seats only).
  std::array<std::optional<std::string>, 2> creation_tokens() const;

  std::string join(Color color);
  nlohmann::json sense(const std::string& token, const std::string& square);
  nlohmann::json move(const std::string& token, const std::string& uci);
  // Messages for the token's seat from index `since`, waiting up to
  // `wait_ms` for at least one to arrive.
  nlohmann::json state(const std::string& token, std::size_t since, int wait_ms);
  // Finished: the full record. Otherwise the caller's own stream only.
  nlohmann::json replay(const std::optional<std::string>& token);

  bool finished();
  nlohmann::json summary();
  // Full record once finished; empty otherwise.
  std::optional<GameRecord> record();

 private:
  Color seat_of(const std::string& token) const;
  void require_turn(Color c, Phase wanted) const;
  void push(Color c, nlohmann::json message);
  nlohmann::json observation_of(Color c) const;
  void begin_turn();
  nlohmann::json do_sense(Color c, Square center);
  nlohmann::json do_move(Color c, const Move& m);
  void finish();
  void drive_bots();

  std::string id_;
  GameConfig config_;
  GroundState state_;
  Phase phase_ = Phase::AwaitingSense;
  std::array<enc::PlayerView, 2> views_{enc::PlayerView(Color::White), enc::PlayerView(Color::Black)};
  std::array<std::unique_ptr<Agent>, 2> bots_;
  std::array<std::optional<std::string>, 2> tokens_;
  std::array<bool, 2> issued_at_creation_{false, false};
  std::array<std::optional<Square>, 2> pending_capture_;
  std::array<std::vector<nlohmann::json>, 2> messages_;
  GameRecord record_;
  TurnEntry entry_;

  mutable std::mutex mutex_;
  std::condition_variable changed_;
};

std::string new_token();

}  // namespace rbc::service
