#pragma once

#include <array>
#include <optional>
#include <random>
#include <vector>

#include "game/agent.hpp"

namespace rbc::arena {

// Moves the player can justify from its own pieces alone: enemy squares are
// unknown, so sliders stop only at own pieces and pawns never move
// diagonally. Pass is never produced.
std::vector<Move> own_view_moves(const enc::PlayerView& view);

// Inner 6x6 sense centers (files b..g, ranks 2..7).
const std::vector<Square>& inner_squares();

class RandomBot : public Agent {
 public:
  explicit RandomBot(std::uint64_t seed) : rng_(seed) {}
  Square choose_sense(const enc::PlayerView& view) override;
  Move choose_move(const enc::PlayerView& view) override;

 private:
  std::mt19937_64 rng_;
};

// Remembers enemy pieces from sense results and capture notices, takes a
// remembered king when it can, otherwise the most valuable remembered
// target, otherwise moves at random. Senses where its knowledge is stalest.
class GreedyBot : public Agent {
 public:
  struct Memory {
    std::optional<PieceKind> kind;  // unset when only a capture notice placed it
    int turn_seen = 0;
  };

  explicit GreedyBot(std::uint64_t seed, int memory_horizon = 6) : rng_(seed), horizon_(memory_horizon) {}
  Square choose_sense(const enc::PlayerView& view) override;
  Move choose_move(const enc::PlayerView& view) override;

  const std::array<std::optional<Memory>, 64>& memory() const { return memory_; }

 private:
  void refresh_from_turn_start(const enc::PlayerView& view);
  void refresh_from_sense(const enc::PlayerView& view);

  std::mt19937_64 rng_;
  int horizon_;
  std::array<std::optional<Memory>, 64> memory_{};
  std::array<int, 64> last_sensed_{};  // 0 = never
};

}  // namespace rbc::arena
