#pragma once

// Referee for Reconnaissance Blind Chess. GroundState is the full hidden
// board; players only ever see the SenseOutcome / MoveOutcome values
// returned from the transitions below.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "engine/bitboard.hpp"
#include "engine/types.hpp"

namespace rbc {

constexpr int kDefaultTurnCap = 200;

enum class EndReason : std::uint8_t { KingCaptured, TurnCapDraw };

struct GameResult {
  std::optional<Color> winner;  // unset iff the game was drawn
  EndReason reason = EndReason::KingCaptured;

  friend bool operator==(const GameResult&, const GameResult&) = default;
};

enum CastlingRight : std::uint8_t {
  kWhiteKingside = 1,
  kWhiteQueenside = 2,
  kBlackKingside = 4,
  kBlackQueenside = 8,
  kAllCastling = 15,
};

struct GroundState {
  // pieces[color][kind]
  std::array<std::array<Bitboard, kPieceKinds>, 2> pieces{};
  Color side_to_move = Color::White;
  std::uint8_t castling = 0;
  std::optional<Square> en_passant;
  int fullmove = 1;
  int turn_cap = kDefaultTurnCap;
  std::optional<GameResult> result;

  Bitboard occupancy(Color c) const;
  Bitboard occupancy() const { return occupancy(Color::White) | occupancy(Color::Black); }
  std::optional<Piece> piece_at(Square s) const;
  int piece_count() const;

  friend bool operator==(const GroundState&, const GroundState&) = default;
};

struct MoveOutcome {
  Color mover = Color::White;
  std::optional<Move> requested;
  std::optional<Move> taken_move;  // what was executed, possibly truncated
  std::optional<Square> capture_square;
  bool was_illegal = false;
};

struct SensedSquare {
  Square square;
  std::optional<Piece> piece;

  friend bool operator==(const SensedSquare&, const SensedSquare&) = default;
};

struct SenseOutcome {
  Square center;
  std::vector<SensedSquare> revealed;  // ascending square order
};

GroundState initial_state(int turn_cap = kDefaultTurnCap);

// Geometry-legal moves for the side to move; check rules do not exist.
// Pass is never listed (it is always accepted by request_move).
std::vector<Move> legal_moves(const GroundState& state);

// Referee transition. Illegal requests consume the turn. Sliding moves
// through an enemy piece are truncated to capturing it; a double pawn push
// onto an occupied square with an empty intermediate square becomes a single
// push. Throws GameOver if the game already ended.
std::pair<GroundState, MoveOutcome> request_move(const GroundState& state, const Move& requested);

// 3x3 window around `center`, clipped at the board edges. Does not mutate.
SenseOutcome apply_sense(const GroundState& state, Square center);

// Window squares for a sense centered at `center`.
Bitboard sense_window(Square center);

// Square where `observer` lost a piece to the opponent's move, if any.
std::optional<Square> capture_notice(const MoveOutcome& outcome, Color observer);

std::optional<GameResult> is_terminal(const GroundState& state);

// Extended FEN: the six standard fields followed by a result tag
// (`*`, `1-0`, `0-1`, `1/2-1/2`). The tag is optional on input.
std::string to_fen(const GroundState& state);
GroundState from_fen(std::string_view fen, int turn_cap = kDefaultTurnCap);

// Pawns that reach the last rank without an explicit promotion become queens.
Move normalize_promotion(const GroundState& state, Move m);

}  // namespace rbc
