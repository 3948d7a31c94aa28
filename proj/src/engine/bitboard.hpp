#pragma once

#include <array>
#include <bit>
#include <cstdint>

#include "engine/types.hpp"

namespace rbc {

using Bitboard = std::uint64_t;

constexpr Bitboard bit(Square s) { return Bitboard{1} << s.index(); }
constexpr Bitboard bit(int index) { return Bitboard{1} << index; }
constexpr bool test(Bitboard b, Square s) { return (b & bit(s)) != 0; }

inline int popcount(Bitboard b) { return std::popcount(b); }

inline Square pop_lsb(Bitboard& b) {
  const int i = std::countr_zero(b);
  b &= b - 1;
  return Square(i);
}

constexpr Bitboard kRank1 = 0xFFull;
constexpr Bitboard kRank8 = kRank1 << 56;

// Compass directions, in the order shared with the move codec.
enum class Direction : std::uint8_t { N = 0, NE, E, SE, S, SW, W, NW };
constexpr int kDirections = 8;
constexpr std::array<int, 8> kDirFile = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kDirRank = {1, 1, 0, -1, -1, -1, 0, 1};

constexpr bool is_diagonal(int dir) { return dir % 2 == 1; }

struct AttackTables {
  std::array<Bitboard, 64> knight{};
  std::array<Bitboard, 64> king{};
  std::array<std::array<Bitboard, 64>, 2> pawn{};  // capture targets per color
  std::array<std::array<Bitboard, 64>, 8> ray{};   // empty-board ray per direction
};

const AttackTables& attack_tables();

// Squares reachable by a slider along `dir` from `from`, stopping at (and
// including) the first occupied square.
Bitboard ray_attacks(int dir, Square from, Bitboard occupied);
Bitboard bishop_attacks(Square from, Bitboard occupied);
Bitboard rook_attacks(Square from, Bitboard occupied);
Bitboard queen_attacks(Square from, Bitboard occupied);

// Squares strictly between two aligned squares (empty if not aligned).
Bitboard between(Square a, Square b);
// Direction index from `a` towards `b` if they share a rank, file or
// diagonal; -1 otherwise.
int direction_between(Square a, Square b);

}  // namespace rbc
