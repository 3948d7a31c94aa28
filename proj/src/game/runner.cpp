#include "game/runner.hpp"

namespace rbc {

PlayedGame play_game(Agent& white, Agent& black, const GameOptions& options) {
  PlayedGame played;
  GameRecord& rec = played.record;
  rec.id = options.id;
  GroundState state = initial_state(options.turn_cap);
  std::array<enc::PlayerView, 2> views{enc::PlayerView(Color::White), enc::PlayerView(Color::Black)};
  std::array<Agent*, 2> agents{&white, &black};
  std::array<std::optional<Square>, 2> pending{};

  while (!state.result) {
    const Color c = state.side_to_move;
    const int ci = index_of(c);
    auto& view = views[ci];
    TurnEntry entry;
    entry.opp_capture = pending[ci];
    pending[ci].reset();
    view.start_turn(entry.opp_capture);

    entry.sense = agents[ci]->choose_sense(view);
    SenseOutcome sense = apply_sense(state, entry.sense);
    entry.sense_result = sense.revealed;
    view.sensed(sense);

    entry.requested_move = agents[ci]->choose_move(view);
    auto [next, outcome] = request_move(state, entry.requested_move);
    entry.taken_move = outcome.taken_move;
    entry.capture_square = outcome.capture_square;
    entry.was_illegal = outcome.was_illegal;
    view.moved(outcome);
    pending[index_of(opposite(c))] = capture_notice(outcome, opposite(c));

    rec.turns[ci].push_back(std::move(entry));
    state = std::move(next);
  }
  rec.result = *state.result;
  rec.meta["reason"] = state.result->reason == EndReason::KingCaptured ? "king_captured" : "turn_cap_draw";
  rec.meta["final_fen"] = to_fen(state);
  for (int c = 0; c < 2; ++c) agents[c]->game_over(views[c], *state.result);
  played.final_state = state;
  return played;
}

}  // namespace rbc
