#pragma once

#include "encoding/player_view.hpp"

namespace rbc {

// A player. It only ever receives its own PlayerView; the referee's
// GroundState is not reachable from this interface.
class Agent {
 public:
  virtual ~Agent() = default;

  // Called after the view has received this turn's capture notice.
  virtual Square choose_sense(const enc::PlayerView& view) = 0;
  // Called after the view has received this turn's sense result.
  virtual Move choose_move(const enc::PlayerView& view) = 0;
  virtual void game_over(const enc::PlayerView& /*view*/, const GameResult& /*result*/) {}
};

}  // namespace rbc
