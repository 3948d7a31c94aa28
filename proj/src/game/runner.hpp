#pragma once

#include <string>

#include "game/agent.hpp"
#include "game/record.hpp"

namespace rbc {

struct GameOptions {
  std::string id = "game";
  int turn_cap = kDefaultTurnCap;
};

struct PlayedGame {
  GameRecord record;
  GroundState final_state;
};

// Referee loop: sense, move, capture notices, until the game ends.
PlayedGame play_game(Agent& white, Agent& black, const GameOptions& options = {});

}  // namespace rbc
