#include "game/record.hpp"

namespace rbc {

using nlohmann::json;

namespace {

json square_or_null(const std::optional<Square>& s) { return s ? json(s->name()) : json(nullptr); }

std::optional<Square> parse_opt_square(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Square::parse(j.get<std::string>());
}

json turn_to_json(const TurnEntry& t) {
  json sense_result = json::array();
  for (const auto& r : t.sense_result) {
    sense_result.push_back(
        json::array({r.square.name(), r.piece ? json(std::string(1, to_fen_char(*r.piece))) : json(nullptr)}));
  }
  return json{{"opp_capture", square_or_null(t.opp_capture)},
              {"sense", t.sense.name()},
              {"sense_result", sense_result},
              {"requested_move", t.requested_move.uci()},
              {"taken_move", t.taken_move ? json(t.taken_move->uci()) : json(nullptr)},
              {"capture_square", square_or_null(t.capture_square)},
              {"was_illegal", t.was_illegal}};
}

TurnEntry turn_from_json(const json& j) {
  TurnEntry t;
  t.opp_capture = parse_opt_square(j.at("opp_capture"));
  t.sense = Square::parse(j.at("sense").get<std::string>());
  for (const auto& r : j.at("sense_result")) {
    if (!r.is_array() || r.size() != 2) throw RecordFormatError("sense_result entries must be [square, piece]");
    std::optional<Piece> piece;
    if (!r[1].is_null()) {
      const auto text = r[1].get<std::string>();
      if (text.size() != 1 || !(piece = piece_from_fen_char(text[0]))) throw RecordFormatError("bad piece letter: " + text);
    }
    t.sense_result.push_back({Square::parse(r[0].get<std::string>()), piece});
  }
  t.requested_move = Move::parse_uci(j.at("requested_move").get<std::string>());
  if (!j.at("taken_move").is_null()) t.taken_move = Move::parse_uci(j.at("taken_move").get<std::string>());
  t.capture_square = parse_opt_square(j.at("capture_square"));
  t.was_illegal = j.at("was_illegal").get<bool>();
  return t;
}

}  // namespace

std::string result_tag(const GameResult& r) {
  if (!r.winner) return "draw";
  return std::string(to_string(*r.winner));
}

json to_json(const GameRecord& record) {
  json out;
  out["id"] = record.id;
  for (Color c : {Color::White, Color::Black}) {
    json turns = json::array();
    for (const auto& t : record.stream(c)) turns.push_back(turn_to_json(t));
    out[std::string(to_string(c))] = json{{"turns", turns}};
  }
  out["result"] = result_tag(record.result);
  out["meta"] = record.meta;
  return out;
}

GameRecord record_from_json(const json& j) {
  try {
    GameRecord r;
    r.id = j.at("id").get<std::string>();
    r.turns[0].clear();
    for (const auto& t : j.at("white").at("turns")) r.turns[0].push_back(turn_from_json(t));
    for (const auto& t : j.at("black").at("turns")) r.turns[1].push_back(turn_from_json(t));
    const auto tag = j.at("result").get<std::string>();
    if (tag == "white") {
      r.result = GameResult{Color::White, EndReason::KingCaptured};
    } else if (tag == "black") {
      r.result = GameResult{Color::Black, EndReason::KingCaptured};
    } else if (tag == "draw") {
      r.result = GameResult{std::nullopt, EndReason::TurnCapDraw};
    } else {
      throw RecordFormatError("result must be white, black or draw");
    }
    if (j.contains("meta")) r.meta = j.at("meta");
    return r;
  } catch (const json::exception& e) {
    throw RecordFormatError(std::string("record schema violation: ") + e.what());
  } catch (const MalformedInput& e) {
    throw RecordFormatError(std::string("record value violation: ") + e.what());
  }
}

ReplayCheck validate_record(const GameRecord& record, int turn_cap) {
  ReplayCheck check;
  GroundState state = initial_state(turn_cap);
  std::array<std::size_t, 2> next_turn{0, 0};
  std::array<std::optional<Square>, 2> pending{};
  auto fail = [&](std::string why) {
    check.ok = false;
    check.reason = std::move(why);
    check.final_state = state;
    return check;
  };

  while (!state.result) {
    const Color c = state.side_to_move;
    const int ci = index_of(c);
    const auto& stream = record.stream(c);
    if (next_turn[ci] >= stream.size()) return fail(std::string(to_string(c)) + " stream ends before the game does");
    const TurnEntry& t = stream[next_turn[ci]];
    const std::string where = std::string(to_string(c)) + " turn " + std::to_string(next_turn[ci]) + ": ";
    if (t.opp_capture != pending[ci]) return fail(where + "capture notice differs from replay");
    const SenseOutcome sense = apply_sense(state, t.sense);
    if (sense.revealed != t.sense_result) return fail(where + "sense result differs from replay");
    auto [next, outcome] = request_move(state, t.requested_move);
    if (outcome.taken_move != t.taken_move) return fail(where + "taken move differs from replay");
    if (outcome.capture_square != t.capture_square) return fail(where + "capture square differs from replay");
    if (outcome.was_illegal != t.was_illegal) return fail(where + "illegal flag differs from replay");
    pending[ci] = std::nullopt;
    pending[index_of(opposite(c))] = capture_notice(outcome, opposite(c));
    ++next_turn[ci];
    state = next;
  }
  if (next_turn[0] != record.turns[0].size() || next_turn[1] != record.turns[1].size())
    return fail("turns recorded after the game ended");
  if (*state.result != record.result) {
    // Draw reason is implied by the tag; compare winners only.
    if (state.result->winner != record.result.winner) return fail("recorded result differs from replay");
  }
  check.final_state = state;
  return check;
}

}  // namespace rbc
