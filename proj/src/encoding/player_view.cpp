#include "encoding/player_view.hpp"

#include <cstdlib>

namespace rbc::enc {

PlayerView::PlayerView(Color color) : color_(color), history_(color) {
  const GroundState start = initial_state();
  own_ = start.pieces[index_of(color)];
  castling_ = color == Color::White ? (kWhiteKingside | kWhiteQueenside) : (kBlackKingside | kBlackQueenside);
}

Bitboard PlayerView::own_occupancy() const {
  Bitboard b = 0;
  for (Bitboard x : own_) b |= x;
  return b;
}

void PlayerView::start_turn(std::optional<Square> opp_capture) {
  if (opp_capture) {
    for (auto& bb : own_) bb &= ~bit(*opp_capture);
    // A captured corner rook takes its castling right with it.
    const int home = color_ == Color::White ? 0 : 56;
    if (opp_capture->index() == home) castling_ &= static_cast<std::uint8_t>(~queenside_right());
    if (opp_capture->index() == home + 7) castling_ &= static_cast<std::uint8_t>(~kingside_right());
  }
  history_.begin_turn(opp_capture, own_);
}

void PlayerView::sensed(const SenseOutcome& sense) { history_.record_sense(sense); }

void PlayerView::moved(const MoveOutcome& outcome) {
  history_.record_move(outcome);
  if (outcome.taken_move) {
    const Move& m = *outcome.taken_move;
    int kind = -1;
    for (int k = 0; k < kPieceKinds; ++k)
      if (test(own_[k], m.from)) kind = k;
    if (kind >= 0) {
      own_[kind] &= ~bit(m.from);
      own_[m.promotion ? index_of(*m.promotion) : kind] |= bit(m.to);
      if (kind == index_of(PieceKind::King) && std::abs(m.to.file() - m.from.file()) == 2) {
        const int r = m.from.rank();
        const bool kingside = m.to.file() > m.from.file();
        auto& rooks = own_[index_of(PieceKind::Rook)];
        rooks &= ~bit(Square::at(kingside ? 7 : 0, r));
        rooks |= bit(Square::at(kingside ? 5 : 3, r));
      }
      const int home = color_ == Color::White ? 0 : 56;
      const auto ks = kingside_right(), qs = queenside_right();
      if (kind == index_of(PieceKind::King)) castling_ &= static_cast<std::uint8_t>(~(ks | qs));
      if (m.from.index() == home) castling_ &= static_cast<std::uint8_t>(~qs);
      if (m.from.index() == home + 7) castling_ &= static_cast<std::uint8_t>(~ks);
    }
  }
  log_.push_back(history_.current());
}

}  // namespace rbc::enc
