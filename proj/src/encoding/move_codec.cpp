#include "encoding/move_codec.hpp"

#include <cstdlib>
#include <string>

namespace rbc::enc {

namespace {

// (dfile, drank) per knight slot.
constexpr int kKnightFile[8] = {1, 2, 2, 1, -1, -2, -2, -1};
constexpr int kKnightRank[8] = {2, 1, -1, -2, -2, -1, 1, 2};

int underpromotion_piece(PieceKind k) {
  switch (k) {
    case PieceKind::Knight: return 0;
    case PieceKind::Bishop: return 1;
    case PieceKind::Rook: return 2;
    default: return -1;
  }
}

constexpr PieceKind kUnderpromotionKinds[3] = {PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook};

}  // namespace

MoveIndex encode_move_index(const Move& move) {
  if (move.is_pass) return MoveIndex{kPassIndex};
  const int df = move.to.file() - move.from.file();
  const int dr = move.to.rank() - move.from.rank();
  if (df == 0 && dr == 0) throw MalformedInput("move has identical from and to squares: " + move.uci());

  if (move.promotion && *move.promotion != PieceKind::Queen) {
    const int piece = underpromotion_piece(*move.promotion);
    if (piece < 0 || std::abs(dr) != 1 || std::abs(df) > 1 || (move.to.rank() != 7 && move.to.rank() != 0))
      throw MalformedInput("not an encodable underpromotion: " + move.uci());
    const bool white = move.to.rank() == 7;
    if ((white && dr != 1) || (!white && dr != -1)) throw MalformedInput("underpromotion in wrong direction: " + move.uci());
    // Left/right are from the mover's viewpoint; black faces down the board.
    const int side = white ? df : -df;
    return MoveIndex{(kUnderpromotionBase + piece * 3 + (side + 1)) * 64 + move.from.index()};
  }

  const int dir = direction_between(move.from, move.to);
  if (dir >= 0) {
    const int distance = std::max(std::abs(df), std::abs(dr));
    return MoveIndex{(dir * 7 + distance - 1) * 64 + move.from.index()};
  }
  for (int k = 0; k < 8; ++k) {
    if (kKnightFile[k] == df && kKnightRank[k] == dr) return MoveIndex{(kKnightPlaneBase + k) * 64 + move.from.index()};
  }
  throw MalformedInput("move has no plane encoding: " + move.uci());
}

Move decode_move_index(MoveIndex index, std::optional<PawnContext> context) {
  if (index.value < 0 || index.value > kPassIndex)
    throw MalformedInput("move index out of range: " + std::to_string(index.value));
  if (index.is_pass()) return Move::pass();
  const int plane = index.plane();
  const Square from = index.from();
  int df = 0, dr = 0;
  std::optional<PieceKind> promo;
  if (plane < kQueenPlanes) {
    const int dir = plane / 7, distance = plane % 7 + 1;
    df = kDirFile[dir] * distance;
    dr = kDirRank[dir] * distance;
  } else if (plane < kUnderpromotionBase) {
    df = kKnightFile[plane - kKnightPlaneBase];
    dr = kKnightRank[plane - kKnightPlaneBase];
  } else {
    const int u = plane - kUnderpromotionBase;
    promo = kUnderpromotionKinds[u / 3];
    const int side = u % 3 - 1;
    // Underpromotions start on the 7th rank of the mover.
    const bool white = from.rank() == 6 || (from.rank() != 1 && (!context || context->mover == Color::White));
    dr = white ? 1 : -1;
    df = white ? side : -side;
  }
  const int tf = from.file() + df, tr = from.rank() + dr;
  if (tf < 0 || tf > 7 || tr < 0 || tr > 7)
    throw MalformedInput("move index points off the board: " + std::to_string(index.value));
  Move m = Move::make(from, Square::at(tf, tr), promo);
  if (!promo && context && test(context->pawns, from) && std::abs(dr) == 1 && std::abs(df) <= 1 &&
      tr == (context->mover == Color::White ? 7 : 0))
    m.promotion = PieceKind::Queen;
  return m;
}

}  // namespace rbc::enc
