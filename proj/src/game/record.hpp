#pragma once

// Game records: one JSON object per game, one game per line.
//
//   {"id": ..., "white": {"turns": [...]}, "black": {"turns": [...]},
//    "result": "white" | "black" | "draw", "meta": {...}}
//
// Each turn entry carries exactly what that player saw and did:
//   {"opp_capture": sq|null, "sense": sq, "sense_result": [[sq, piece|null], ...],
//    "requested_move": uci, "taken_move": uci|null, "capture_square": sq|null,
//    "was_illegal": bool}

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "encoding/player_view.hpp"
#include "engine/engine.hpp"

namespace rbc {

struct TurnEntry {
  std::optional<Square> opp_capture;
  Square sense;
  std::vector<SensedSquare> sense_result;
  Move requested_move;
  std::optional<Move> taken_move;
  std::optional<Square> capture_square;
  bool was_illegal = false;

  friend bool operator==(const TurnEntry&, const TurnEntry&) = default;
};

struct GameRecord {
  std::string id;
  std::array<std::vector<TurnEntry>, 2> turns;  // indexed by colour
  GameResult result;
  nlohmann::json meta = nlohmann::json::object();

  const std::vector<TurnEntry>& stream(Color c) const { return turns[index_of(c)]; }
};

class RecordFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const GameRecord& record);
GameRecord record_from_json(const nlohmann::json& j);  // throws RecordFormatError
std::string result_tag(const GameResult& r);           // "white" | "black" | "draw"

struct ReplayCheck {
  bool ok = true;
  std::string reason;
  GroundState final_state;
};

// Re-runs both streams through the referee and compares every recorded
// observation and outcome.
ReplayCheck validate_record(const GameRecord& record, int turn_cap = kDefaultTurnCap);

// Rebuilds one player's view turn by turn from that player's own entries;
// `visit(view, entry, stage)` is called at each decision point (pre-sense,
// then pre-move) before the entry's action is applied.
template <typename Visitor>
void replay_stream(const GameRecord& record, Color color, Visitor&& visit) {
  enc::PlayerView view(color);
  for (const TurnEntry& t : record.stream(color)) {
    view.start_turn(t.opp_capture);
    visit(std::as_const(view), t, enc::Stage::PreSense);
    view.sensed(SenseOutcome{t.sense, t.sense_result});
    visit(std::as_const(view), t, enc::Stage::PreMove);
    MoveOutcome out;
    out.mover = color;
    out.requested = t.requested_move;
    out.taken_move = t.taken_move;
    out.capture_square = t.capture_square;
    out.was_illegal = t.was_illegal;
    view.moved(out);
  }
}

}  // namespace rbc
