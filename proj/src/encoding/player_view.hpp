#pragma once

#include <optional>
#include <vector>

#include "encoding/observation.hpp"

namespace rbc::enc {

// Everything one player legitimately knows: own pieces (kept exact through
// own moves and capture notices), own castling rights and the observation
// history. Agents and bots are handed this object and nothing else.
class PlayerView {
 public:
  explicit PlayerView(Color color);

  void start_turn(std::optional<Square> opp_capture);
  void sensed(const SenseOutcome& sense);
  void moved(const MoveOutcome& outcome);

  Color color() const { return color_; }
  const PieceSets& own_pieces() const { return own_; }
  Bitboard own_occupancy() const;
  std::uint8_t own_castling() const { return castling_; }
  int turn() const { return history_.turns(); }
  const ObservationHistory& history() const { return history_; }
  PlaneStack stack(Stage stage) const { return history_.encode(stage); }
  PawnContext pawn_context() const { return PawnContext{color_, own_[index_of(PieceKind::Pawn)]}; }

  // Completed observation frames in turn order, for game records.
  const std::vector<Observation>& log() const { return log_; }

 private:
  std::uint8_t kingside_right() const { return color_ == Color::White ? kWhiteKingside : kBlackKingside; }
  std::uint8_t queenside_right() const { return color_ == Color::White ? kWhiteQueenside : kBlackQueenside; }

  Color color_;
  PieceSets own_{};
  std::uint8_t castling_ = 0;
  ObservationHistory history_;
  std::vector<Observation> log_;
};

}  // namespace rbc::enc
