#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/bots.hpp"
#include "encoding/observation_json.hpp"
#include "service/service.hpp"

namespace rbc::testing {

// A remote player that knows only the messages addressed to its seat. It
// rebuilds its own PlayerView from them and lets a bot choose.
struct Client {
  service::GameService& svc;
  std::string game, token;
  Color color;
  enc::PlayerView view;
  std::unique_ptr<Agent> bot;
  std::size_t seen = 0;
  std::vector<nlohmann::json> inbox;

  Client(service::GameService& s, std::string g, std::string t, Color c, std::uint64_t seed)
      : svc(s), game(std::move(g)), token(std::move(t)), color(c), view(c), bot(std::make_unique<arena::RandomBot>(seed)) {}

  // Reads new messages; returns true if it is our turn to sense.
  bool poll() {
    const nlohmann::json st = svc.state(game, token, seen, 0);
    bool ours = false;
    for (const auto& m : st["messages"]) {
      inbox.push_back(m);
      ++seen;
      if (m["type"] == "your_turn") {
        const auto& cap = m["payload"]["opp_capture"];
        view.start_turn(cap.is_null() ? std::nullopt : std::optional(Square::parse(cap.get<std::string>())));
        ours = true;
      }
    }
    return ours && st["phase"] == "awaiting_sense";
  }

  void play_turn() {
    const Square s = bot->choose_sense(view);
    const nlohmann::json sr = svc.sense(game, {{"token", token}, {"square", s.name()}});
    inbox.push_back(sr);
    ++seen;
    SenseOutcome so{s, {}};
    for (const auto& r : sr["payload"]["revealed"])
      so.revealed.push_back({Square::parse(r[0].get<std::string>()),
                             r[1].is_null() ? std::nullopt : piece_from_fen_char(r[1].get<std::string>()[0])});
    view.sensed(so);
    const Move m = bot->choose_move(view);
    const nlohmann::json mr = svc.move(game, {{"token", token}, {"move", m.uci()}});
    inbox.push_back(mr);
    ++seen;
    const auto& p = mr["payload"];
    MoveOutcome out;
    out.mover = color;
    out.requested = m;
    if (!p["taken"].is_null()) out.taken_move = Move::parse_uci(p["taken"].get<std::string>());
    if (!p["capture_square"].is_null()) out.capture_square = Square::parse(p["capture_square"].get<std::string>());
    out.was_illegal = p["was_illegal"];
    view.moved(out);
  }
};

// Message payloads a seat may receive, rebuilt from that seat's own stream.
inline std::vector<nlohmann::json> allowed_projection(const GameRecord& rec, Color c) {
  std::vector<nlohmann::json> out;
  int turn = 0;
  replay_stream(rec, c, [&](const enc::PlayerView& v, const TurnEntry& t, enc::Stage stage) {
    if (stage == enc::Stage::PreSense) {
      ++turn;
      out.push_back({{"type", "your_turn"},
                     {"payload",
                      {{"turn", turn},
                       {"opp_capture", t.opp_capture ? nlohmann::json(t.opp_capture->name()) : nlohmann::json(nullptr)},
                       {"observation", enc::to_json(v.history().current())}}}});
      return;
    }
    nlohmann::json revealed = nlohmann::json::array();
    for (const auto& r : t.sense_result)
      revealed.push_back({r.square.name(), r.piece ? nlohmann::json(std::string(1, to_fen_char(*r.piece))) : nlohmann::json(nullptr)});
    out.push_back({{"type", "sense_result"},
                   {"payload", {{"turn", turn}, {"sense", t.sense.name()}, {"revealed", revealed}, {"observation", enc::to_json(v.history().current())}}}});
    out.push_back({{"type", "move_result"},
                   {"payload",
                    {{"turn", turn},
                     {"requested", t.requested_move.uci()},
                     {"taken", t.taken_move ? nlohmann::json(t.taken_move->uci()) : nlohmann::json(nullptr)},
                     {"capture_square", t.capture_square ? nlohmann::json(t.capture_square->name()) : nlohmann::json(nullptr)},
                     {"was_illegal", t.was_illegal},
                     {"observation", nullptr}}}});  // filled below from the completed frame
  });
  // The completed frame after each move is the view's log entry for that turn.
  enc::PlayerView v(c);
  std::size_t k = 0;
  for (auto& m : out) {
    if (m["type"] != "move_result") continue;
    const auto& t = rec.stream(c)[k++];
    v.start_turn(t.opp_capture);
    v.sensed(SenseOutcome{t.sense, t.sense_result});
    MoveOutcome mo;
    mo.mover = c;
    mo.requested = t.requested_move;
    mo.taken_move = t.taken_move;
    mo.capture_square = t.capture_square;
    mo.was_illegal = t.was_illegal;
    v.moved(mo);
    m["payload"]["observation"] = enc::to_json(v.log().back());
  }
  return out;
}

inline void play_out(std::vector<Client*> clients) {
  for (int guard = 0; guard < 1000; ++guard) {
    bool progressed = false;
    for (auto* c : clients)
      if (c->poll()) {
        c->play_turn();
        progressed = true;
      }
    if (!progressed) return;
  }
}

}  // namespace rbc::testing
