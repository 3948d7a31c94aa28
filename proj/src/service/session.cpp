#include "service/session.hpp"

#include <chrono>
#include <random>

#include "encoding/observation_json.hpp"

namespace rbc::service {

using nlohmann::json;

namespace {

json square_or_null(const std::optional<Square>& s) { return s ? json(s->name()) : json(nullptr); }

json revealed_json(const std::vector<SensedSquare>& revealed) {
  json out = json::array();
  for (const auto& r : revealed)
    out.push_back(json::array({r.square.name(), r.piece ? json(std::string(1, to_fen_char(*r.piece))) : json(nullptr)}));
  return out;
}

std::string color_name(Color c) { return c == Color::White ? "white" : "black"; }

}  // namespace

json error_message(const ServiceError& e, const std::string& game) {
  json j{{"protocol", kProtocolVersion}, {"type", "error"}, {"code", e.code()}, {"message", e.what()}};
  if (!game.empty()) j["game"] = game;
  return j;
}

std::string new_token() {
  std::random_device rd;
  std::uniform_int_distribution<unsigned> hex(0, 15);
  std::string t(32, '0');
  for (char& ch : t) ch = "0123456789abcdef"[hex(rd)];
  return t;
}

SeatSpec SeatSpec::parse(const json& j) {
  SeatSpec s;
  const std::string text = j.is_string() ? j.get<std::string>() : j.is_object() ? j.value("type", std::string()) : std::string();
  if (text == "human") return s;
  if (text == "open") {
    s.kind = Kind::Open;
    return s;
  }
  if (text.empty()) throw ServiceError("invalid_config", 400, "a seat must be \"human\", \"open\" or a bot spec");
  try {
    s.bot = arena::BotSpec::parse(j.is_object() ? j.value("bot", text) : text);
  } catch (const std::exception& e) {
    throw ServiceError("invalid_config", 400, std::string("bad seat: ") + e.what());
  }
  s.kind = Kind::Bot;
  return s;
}

json SeatSpec::to_json() const {
  switch (kind) {
    case Kind::Human: return "human";
    case Kind::Open: return "open";
    case Kind::Bot: return bot.str();
  }
  return nullptr;
}

GameConfig GameConfig::parse(const json& j) {
  if (!j.is_object()) throw ServiceError("invalid_config", 400, "game config must be a JSON object");
  GameConfig c;
  try {
    c.seats[0] = SeatSpec::parse(j.value("white", json("human")));
    c.seats[1] = SeatSpec::parse(j.value("black", json("open")));
    c.seed = j.value("seed", std::uint64_t{0});
    c.turn_cap = j.value("turn_cap", kDefaultTurnCap);
  } catch (const json::exception& e) {
    throw ServiceError("invalid_config", 400, std::string("bad game config: ") + e.what());
  }
  if (c.turn_cap < 1) throw ServiceError("invalid_config", 400, "turn_cap must be positive");
  return c;
}

std::string phase_name(Phase p) {
  switch (p) {
    case Phase::AwaitingSense: return "awaiting_sense";
    case Phase::AwaitingMove: return "awaiting_move";
    case Phase::Finished: return "finished";
  }
  return "";
}

std::unique_ptr<Agent> AgentSource::make(const arena::BotSpec& spec, std::uint64_t seed) {
  std::lock_guard lock(mutex_);
  try {
    return factory_.make(spec, seed);
  } catch (const std::exception& e) {
    throw ServiceError("invalid_config", 400, "cannot create bot " + spec.str() + ": " + e.what());
  }
}

GameSession::GameSession(std::string id, const GameConfig& config, AgentSource& agents)
    : id_(std::move(id)), config_(config), state_(initial_state(config.turn_cap)) {
  record_.id = id_;
  for (int c = 0; c < 2; ++c) {
    const auto& seat = config_.seats[c];
    if (seat.kind == SeatSpec::Kind::Bot) bots_[c] = agents.make(seat.bot, arena::game_seed(config_.seed, 0, c));
    if (seat.kind == SeatSpec::Kind::Human) {
      tokens_[c] = new_token();
      issued_at_creation_[c] = true;
    }
  }
  record_.meta["white"] = config_.seats[0].to_json();
  record_.meta["black"] = config_.seats[1].to_json();
  record_.meta["seed"] = config_.seed;
  std::lock_guard lock(mutex_);
  begin_turn();
  drive_bots();
}

std::array<std::optional<std::string>, 2> GameSession::creation_tokens() const {
  std::lock_guard lock(mutex_);
  std::array<std::optional<std::string>, 2> out;
  for (int c = 0; c < 2; ++c)
    if (issued_at_creation_[c]) out[c] = tokens_[c];
  return out;
}

std::string GameSession::join(Color color) {
  std::lock_guard lock(mutex_);
  const int c = index_of(color);
  if (config_.seats[c].kind != SeatSpec::Kind::Open) throw ServiceError("seat_taken", 409, color_name(color) + " is not an open seat");
  if (tokens_[c]) throw ServiceError("seat_taken", 409, color_name(color) + " has already been joined");
  tokens_[c] = new_token();
  return *tokens_[c];
}

Color GameSession::seat_of(const std::string& token) const {
  for (int c = 0; c < 2; ++c)
    if (tokens_[c] && *tokens_[c] == token) return static_cast<Color>(c);
  throw ServiceError("bad_token", 403, "token does not hold a seat in this game");
}

void GameSession::require_turn(Color c, Phase wanted) const {
  if (phase_ == Phase::Finished) throw ServiceError("game_finished", 409, "the game is over");
  if (state_.side_to_move != c || phase_ != wanted)
    throw ServiceError("out_of_turn", 409, "expected " + phase_name(phase_) + " from " + color_name(state_.side_to_move));
}

void GameSession::push(Color c, json message) {
  auto& log = messages_[index_of(c)];
  message["protocol"] = kProtocolVersion;
  message["game"] = id_;
  message["seat"] = color_name(c);
  message["seq"] = log.size();
  log.push_back(std::move(message));
}

json GameSession::observation_of(Color c) const { return enc::to_json(views_[index_of(c)].history().current()); }

void GameSession::begin_turn() {
  const Color c = state_.side_to_move;
  const int ci = index_of(c);
  entry_ = TurnEntry{};
  entry_.opp_capture = pending_capture_[ci];
  pending_capture_[ci].reset();
  views_[ci].start_turn(entry_.opp_capture);
  phase_ = Phase::AwaitingSense;
  push(c, {{"type", "your_turn"},
           {"payload", {{"turn", views_[ci].turn()}, {"opp_capture", square_or_null(entry_.opp_capture)}, {"observation", observation_of(c)}}}});
}

json GameSession::do_sense(Color c, Square center) {
  const int ci = index_of(c);
  const SenseOutcome out = apply_sense(state_, center);
  views_[ci].sensed(out);
  entry_.sense = center;
  entry_.sense_result = out.revealed;
  phase_ = Phase::AwaitingMove;
  push(c, {{"type", "sense_result"},
           {"payload",
            {{"turn", views_[ci].turn()}, {"sense", center.name()}, {"revealed", revealed_json(out.revealed)}, {"observation", observation_of(c)}}}});
  return messages_[ci].back();
}

json GameSession::do_move(Color c, const Move& m) {
  const int ci = index_of(c);
  auto [next, out] = request_move(state_, m);
  views_[ci].moved(out);
  entry_.requested_move = m;
  entry_.taken_move = out.taken_move;
  entry_.capture_square = out.capture_square;
  entry_.was_illegal = out.was_illegal;
  record_.turns[ci].push_back(entry_);
  pending_capture_[index_of(opposite(c))] = capture_notice(out, opposite(c));
  state_ = std::move(next);
  push(c, {{"type", "move_result"},
           {"payload",
            {{"turn", views_[ci].turn()},
             {"requested", m.uci()},
             {"taken", out.taken_move ? json(out.taken_move->uci()) : json(nullptr)},
             {"capture_square", square_or_null(out.capture_square)},
             {"was_illegal", out.was_illegal},
             {"observation", observation_of(c)}}}});
  json reply = messages_[ci].back();
  if (state_.result) finish();
  else begin_turn();
  changed_.notify_all();
  return reply;
}

void GameSession::finish() {
  phase_ = Phase::Finished;
  record_.result = *state_.result;
  record_.meta["reason"] = state_.result->reason == EndReason::KingCaptured ? "king_captured" : "turn_cap_draw";
  record_.meta["final_fen"] = to_fen(state_);
  for (int c = 0; c < 2; ++c) {
    if (bots_[c]) bots_[c]->game_over(views_[c], record_.result);
    push(static_cast<Color>(c), {{"type", "game_over"},
                                 {"payload",
                                  {{"result", result_tag(record_.result)},
                                   {"reason", record_.meta["reason"]},
                                   {"final_fen", record_.meta["final_fen"]},
                                   {"turns", record_.turns[0].size() + record_.turns[1].size()}}}});
  }
}

void GameSession::drive_bots() {
  while (phase_ != Phase::Finished) {
    const Color c = state_.side_to_move;
    auto& bot = bots_[index_of(c)];
    if (!bot) return;
    const auto& view = views_[index_of(c)];
    if (phase_ == Phase::AwaitingSense) do_sense(c, bot->choose_sense(view));
    else do_move(c, bot->choose_move(view));
  }
  changed_.notify_all();
}

json GameSession::sense(const std::string& token, const std::string& square) {
  std::lock_guard lock(mutex_);
  const Color c = seat_of(token);
  require_turn(c, Phase::AwaitingSense);
  Square center;
  try {
    center = Square::parse(square);
  } catch (const std::exception&) {
    throw ServiceError("malformed", 400, "bad square \"" + square + "\"");
  }
  json reply = do_sense(c, center);
  changed_.notify_all();
  return reply;
}

json GameSession::move(const std::string& token, const std::string& uci) {
  std::lock_guard lock(mutex_);
  const Color c = seat_of(token);
  require_turn(c, Phase::AwaitingMove);
  Move m;
  try {
    m = Move::parse_uci(uci);
  } catch (const std::exception&) {
    throw ServiceError("malformed", 400, "bad move \"" + uci + "\"");
  }
  json reply = do_move(c, m);
  drive_bots();
  return reply;
}

json GameSession::state(const std::string& token, std::size_t since, int wait_ms) {
  std::unique_lock lock(mutex_);
  const Color c = seat_of(token);
  const auto& log = messages_[index_of(c)];
  if (wait_ms > 0)
    changed_.wait_for(lock, std::chrono::milliseconds(wait_ms), [&] { return log.size() > since || phase_ == Phase::Finished; });
  json out{{"protocol", kProtocolVersion},
           {"type", "state"},
           {"game", id_},
           {"seat", color_name(c)},
           {"phase", phase_name(phase_)},
           {"to_move", phase_ == Phase::Finished ? json(nullptr) : json(color_name(state_.side_to_move))},
           {"messages", json::array()}};
  for (std::size_t i = since; i < log.size(); ++i) out["messages"].push_back(log[i]);
  return out;
}

json GameSession::replay(const std::optional<std::string>& token) {
  std::lock_guard lock(mutex_);
  if (phase_ == Phase::Finished) return to_json(record_);
  if (!token) throw ServiceError("not_finished", 409, "the game is in progress; pass a seat token for your own stream");
  const Color c = seat_of(*token);
  // Own stream only: reuse the record layout with the other side left out.
  GameRecord own;
  own.id = id_;
  own.turns[index_of(c)] = record_.turns[index_of(c)];
  json j = to_json(own);
  j.erase(color_name(opposite(c)));
  j.erase("result");
  j["in_progress"] = true;
  return j;
}

bool GameSession::finished() {
  std::lock_guard lock(mutex_);
  return phase_ == Phase::Finished;
}

json GameSession::summary() {
  std::lock_guard lock(mutex_);
  json j{{"game", id_},
         {"phase", phase_name(phase_)},
         {"white", config_.seats[0].to_json()},
         {"black", config_.seats[1].to_json()},
         {"open_seats", json::array()}};
  for (int c = 0; c < 2; ++c)
    if (config_.seats[c].kind == SeatSpec::Kind::Open && !tokens_[c]) j["open_seats"].push_back(color_name(static_cast<Color>(c)));
  if (phase_ == Phase::Finished) j["result"] = result_tag(record_.result);
  return j;
}

std::optional<GameRecord> GameSession::record() {
  std::lock_guard lock(mutex_);
  if (phase_ != Phase::Finished) return std::nullopt;
  return record_;
}

}  // namespace rbc::service
