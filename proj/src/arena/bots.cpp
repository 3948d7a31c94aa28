#include "arena/bots.hpp"

#include <algorithm>

namespace rbc::arena {

namespace {

template <typename T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

int piece_value(std::optional<PieceKind> k) {
  if (!k) return 2;
  constexpr int kValues[kPieceKinds] = {1, 3, 3, 5, 9, 100};
  return kValues[index_of(*k)];
}

// Geometric capture of `target` by the own piece of `kind` on `from`, given
// which squares are believed occupied.
bool can_capture(PieceKind kind, Square from, Square target, Color us, Bitboard believed) {
  const auto& t = attack_tables();
  switch (kind) {
    case PieceKind::Pawn: return test(t.pawn[index_of(us)][from.index()], target);
    case PieceKind::Knight: return test(t.knight[from.index()], target);
    case PieceKind::King: return test(t.king[from.index()], target);
    case PieceKind::Bishop: return test(bishop_attacks(from, believed), target);
    case PieceKind::Rook: return test(rook_attacks(from, believed), target);
    case PieceKind::Queen: return test(queen_attacks(from, believed), target);
  }
  return false;
}

}  // namespace

const std::vector<Square>& inner_squares() {
  static const std::vector<Square> squares = [] {
    std::vector<Square> out;
    for (int r = 1; r <= 6; ++r)
      for (int f = 1; f <= 6; ++f) out.push_back(Square::at(f, r));
    return out;
  }();
  return squares;
}

std::vector<Move> own_view_moves(const enc::PlayerView& view) {
  std::vector<Move> out;
  const Color us = view.color();
  const auto& own = view.own_pieces();
  const Bitboard occ = view.own_occupancy();
  const auto& t = attack_tables();
  const int fwd = us == Color::White ? 8 : -8;
  const int start = us == Color::White ? 1 : 6, last = us == Color::White ? 7 : 0;

  for (Bitboard pawns = own[index_of(PieceKind::Pawn)]; pawns;) {
    const Square from = pop_lsb(pawns);
    const Square one(from.index() + fwd);
    if (test(occ, one)) continue;
    out.push_back(one.rank() == last ? Move::make(from, one, PieceKind::Queen) : Move::make(from, one));
    if (from.rank() == start && !test(occ, Square(one.index() + fwd))) out.push_back(Move::make(from, Square(one.index() + fwd)));
  }
  auto emit = [&](PieceKind kind, auto attacks) {
    for (Bitboard b = own[index_of(kind)]; b;) {
      const Square from = pop_lsb(b);
      for (Bitboard to = attacks(from) & ~occ; to;) out.push_back(Move::make(from, pop_lsb(to)));
    }
  };
  emit(PieceKind::Knight, [&](Square f) { return t.knight[f.index()]; });
  emit(PieceKind::Bishop, [&](Square f) { return bishop_attacks(f, occ); });
  emit(PieceKind::Rook, [&](Square f) { return rook_attacks(f, occ); });
  emit(PieceKind::Queen, [&](Square f) { return queen_attacks(f, occ); });
  emit(PieceKind::King, [&](Square f) { return t.king[f.index()]; });

  const int r = us == Color::White ? 0 : 7;
  const Square king_sq = Square::at(4, r);
  if (test(own[index_of(PieceKind::King)], king_sq)) {
    const auto rights = view.own_castling();
    const auto ks = us == Color::White ? kWhiteKingside : kBlackKingside;
    const auto qs = us == Color::White ? kWhiteQueenside : kBlackQueenside;
    if ((rights & ks) && test(own[index_of(PieceKind::Rook)], Square::at(7, r)) && !(occ & between(king_sq, Square::at(7, r))))
      out.push_back(Move::make(king_sq, Square::at(6, r)));
    if ((rights & qs) && test(own[index_of(PieceKind::Rook)], Square::at(0, r)) && !(occ & between(king_sq, Square::at(0, r))))
      out.push_back(Move::make(king_sq, Square::at(2, r)));
  }
  return out;
}

Square RandomBot::choose_sense(const enc::PlayerView&) { return pick(inner_squares(), rng_); }

Move RandomBot::choose_move(const enc::PlayerView& view) {
  const auto moves = own_view_moves(view);
  if (moves.empty()) return Move::pass();
  return pick(moves, rng_);
}

void GreedyBot::refresh_from_turn_start(const enc::PlayerView& view) {
  const int turn = view.turn();
  for (auto& m : memory_)
    if (m && turn - m->turn_seen > horizon_) m.reset();
  // Nothing of theirs can stand where our pieces are.
  for (Bitboard own = view.own_occupancy(); own;) memory_[static_cast<std::size_t>(pop_lsb(own).index())].reset();
  if (const auto& cap = view.history().current().opp_capture_square) memory_[static_cast<std::size_t>(cap->index())] = Memory{std::nullopt, turn};
}

void GreedyBot::refresh_from_sense(const enc::PlayerView& view) {
  const auto& obs = view.history().current();
  const int turn = view.turn();
  for (Bitboard w = obs.sense_window; w;) {
    const auto i = static_cast<std::size_t>(pop_lsb(w).index());
    memory_[i].reset();
    last_sensed_[i] = turn;
  }
  for (int k = 0; k < kPieceKinds; ++k)
    for (Bitboard b = obs.sense_pieces[k]; b;)
      memory_[static_cast<std::size_t>(pop_lsb(b).index())] = Memory{static_cast<PieceKind>(k), turn};
}

Square GreedyBot::choose_sense(const enc::PlayerView& view) {
  refresh_from_turn_start(view);
  const int turn = view.turn();
  std::vector<Square> best;
  long best_score = -1;
  for (Square c : inner_squares()) {
    long score = 0;
    for (Bitboard w = sense_window(c); w;) {
      const int seen = last_sensed_[static_cast<std::size_t>(pop_lsb(w).index())];
      score += seen == 0 ? 2L * turn + 8 : turn - seen;
    }
    if (score > best_score) {
      best_score = score;
      best.clear();
    }
    if (score == best_score) best.push_back(c);
  }
  return pick(best, rng_);
}

Move GreedyBot::choose_move(const enc::PlayerView& view) {
  refresh_from_sense(view);
  const Color us = view.color();
  Bitboard believed = view.own_occupancy();
  for (int i = 0; i < 64; ++i)
    if (memory_[static_cast<std::size_t>(i)]) believed |= bit(i);

  struct Candidate {
    Move move;
    int score;
  };
  std::vector<Candidate> captures;
  const int last = us == Color::White ? 7 : 0;
  for (int i = 0; i < 64; ++i) {
    const auto& mem = memory_[static_cast<std::size_t>(i)];
    if (!mem) continue;
    const Square target(i);
    const int victim = piece_value(mem->kind);
    for (int k = 0; k < kPieceKinds; ++k) {
      for (Bitboard b = view.own_pieces()[k]; b;) {
        const Square from = pop_lsb(b);
        const auto kind = static_cast<PieceKind>(k);
        if (!can_capture(kind, from, target, us, believed)) continue;
        Move m = Move::make(from, target);
        if (kind == PieceKind::Pawn && target.rank() == last) m.promotion = PieceKind::Queen;
        captures.push_back({m, victim * 16 - piece_value(kind)});
      }
    }
  }
  if (!captures.empty()) {
    const int top = std::max_element(captures.begin(), captures.end(), [](const auto& a, const auto& b) {
                      return a.score < b.score;
                    })->score;
    std::vector<Move> best;
    for (const auto& c : captures)
      if (c.score == top) best.push_back(c.move);
    return pick(best, rng_);
  }
  const auto moves = own_view_moves(view);
  if (moves.empty()) return Move::pass();
  return pick(moves, rng_);
}

}  // namespace rbc::arena
