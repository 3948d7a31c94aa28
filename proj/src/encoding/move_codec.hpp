#pragma once

#include <cstdint>
#include <optional>

#include "engine/bitboard.hpp"
#include "engine/types.hpp"

namespace rbc::enc {

constexpr int kMovePlanes = 73;
constexpr int kPassIndex = kMovePlanes * 64;  // 4672
constexpr int kMoveIndexCount = kPassIndex + 1;
constexpr int kSenseIndexCount = 64;

// Plane groups within the 73 move planes.
constexpr int kQueenPlanes = 56;   // direction * 7 + (distance - 1)
constexpr int kKnightPlaneBase = 56;
constexpr int kUnderpromotionBase = 64;  // 64 + piece(N,B,R) * 3 + (left, push, right)

struct MoveIndex {
  int value = 0;

  constexpr int plane() const { return value / 64; }
  constexpr Square from() const { return Square(value % 64); }
  constexpr bool is_pass() const { return value == kPassIndex; }
  friend constexpr bool operator==(MoveIndex, MoveIndex) = default;
};

struct SenseIndex {
  int value = 0;

  static SenseIndex of(Square s) { return SenseIndex{s.index()}; }
  Square square() const { return Square(value); }
  friend constexpr bool operator==(SenseIndex, SenseIndex) = default;
};

// Whether the piece making the move is a pawn of `mover`; queen-style moves
// by such a pawn onto its last rank decode as queen promotions.
struct PawnContext {
  Color mover = Color::White;
  Bitboard pawns = 0;
};

// Board frame is always white's; the colour plane of the input tells the
// network which side it is. Throws MalformedInput for moves with no plane.
MoveIndex encode_move_index(const Move& move);
Move decode_move_index(MoveIndex index, std::optional<PawnContext> context = std::nullopt);

}  // namespace rbc::enc
