#include "engine/engine.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace rbc {

namespace {

constexpr PieceKind kPromotionKinds[4] = {PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight};

int pawn_forward(Color c) { return c == Color::White ? 8 : -8; }
int home_rank(Color c) { return c == Color::White ? 0 : 7; }
int pawn_start_rank(Color c) { return c == Color::White ? 1 : 6; }
int last_rank(Color c) { return c == Color::White ? 7 : 0; }

void add_pawn_move(std::vector<Move>& out, Square from, Square to, Color us) {
  if (to.rank() == last_rank(us)) {
    for (PieceKind k : kPromotionKinds) out.push_back(Move::make(from, to, k));
  } else {
    out.push_back(Move::make(from, to));
  }
}

void remove_piece(GroundState& s, Square sq) {
  for (auto& side : s.pieces)
    for (auto& bb : side) bb &= ~bit(sq);
}

std::uint8_t rights_touching(Square sq) {
  switch (sq.index()) {
    case 0: return kWhiteQueenside;
    case 7: return kWhiteKingside;
    case 56: return kBlackQueenside;
    case 63: return kBlackKingside;
    case 4: return kWhiteKingside | kWhiteQueenside;
    case 60: return kBlackKingside | kBlackQueenside;
    default: return 0;
  }
}

void advance_turn(GroundState& s) {
  if (s.side_to_move == Color::Black) ++s.fullmove;
  s.side_to_move = opposite(s.side_to_move);
  if (!s.result && s.fullmove > s.turn_cap) s.result = GameResult{std::nullopt, EndReason::TurnCapDraw};
}

// Executes a move already known to be geometry-legal. Returns the square of
// the removed enemy piece, if any.
std::optional<Square> execute(GroundState& s, const Move& m) {
  const Color us = s.side_to_move, them = opposite(us);
  const auto moving = s.piece_at(m.from);
  std::optional<Square> captured;
  if (moving->kind == PieceKind::Pawn && s.en_passant && m.to == *s.en_passant && !s.piece_at(m.to)) {
    captured = Square::at(m.to.file(), m.from.rank());
  } else if (test(s.occupancy(them), m.to)) {
    captured = m.to;
  }
  std::optional<Piece> victim;
  if (captured) {
    victim = s.piece_at(*captured);
    remove_piece(s, *captured);
  }

  auto& own = s.pieces[index_of(us)];
  own[index_of(moving->kind)] &= ~bit(m.from);
  own[index_of(m.promotion.value_or(moving->kind))] |= bit(m.to);

  if (moving->kind == PieceKind::King && std::abs(m.to.file() - m.from.file()) == 2) {
    const int r = m.from.rank();
    const bool kingside = m.to.file() > m.from.file();
    const Square rook_from = Square::at(kingside ? 7 : 0, r), rook_to = Square::at(kingside ? 5 : 3, r);
    own[index_of(PieceKind::Rook)] &= ~bit(rook_from);
    own[index_of(PieceKind::Rook)] |= bit(rook_to);
  }

  s.castling &= static_cast<std::uint8_t>(~(rights_touching(m.from) | rights_touching(m.to)));
  if (moving->kind == PieceKind::Pawn && std::abs(m.to.index() - m.from.index()) == 16) {
    s.en_passant = Square((m.from.index() + m.to.index()) / 2);
  } else {
    s.en_passant.reset();
  }
  if (victim && victim->kind == PieceKind::King) s.result = GameResult{us, EndReason::KingCaptured};
  advance_turn(s);
  return captured;
}

void require_ongoing(const GroundState& s) {
  if (s.result) throw GameOver("game is already over");
}

}  // namespace

std::string_view to_string(Color c) { return c == Color::White ? "white" : "black"; }

char to_fen_char(Piece p) {
  constexpr char kLetters[] = "pnbrqk";
  const char c = kLetters[index_of(p.kind)];
  return p.color == Color::White ? static_cast<char>(std::toupper(c)) : c;
}

std::optional<Piece> piece_from_fen_char(char c) {
  constexpr std::string_view kLetters = "pnbrqk";
  const auto pos = kLetters.find(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (pos == std::string_view::npos) return std::nullopt;
  return Piece{std::isupper(static_cast<unsigned char>(c)) ? Color::White : Color::Black, static_cast<PieceKind>(pos)};
}

Square Square::parse(std::string_view name) {
  if (name.size() != 2 || name[0] < 'a' || name[0] > 'h' || name[1] < '1' || name[1] > '8')
    throw MalformedInput("bad square name: '" + std::string(name) + "'");
  return Square::at(name[0] - 'a', name[1] - '1');
}

std::string Square::name() const {
  return {static_cast<char>('a' + file()), static_cast<char>('1' + rank())};
}

std::string Move::uci() const {
  if (is_pass) return "pass";
  std::string out = from.name() + to.name();
  if (promotion) out += static_cast<char>(std::tolower(to_fen_char(Piece{Color::White, *promotion})));
  return out;
}

Move Move::parse_uci(std::string_view text) {
  if (text == "pass" || text == "0000") return Move::pass();
  if (text.size() != 4 && text.size() != 5) throw MalformedInput("bad move text: '" + std::string(text) + "'");
  Move m = Move::make(Square::parse(text.substr(0, 2)), Square::parse(text.substr(2, 2)));
  if (text.size() == 5) {
    const auto p = piece_from_fen_char(text[4]);
    if (!p || p->kind == PieceKind::Pawn || p->kind == PieceKind::King)
      throw MalformedInput("bad promotion in move: '" + std::string(text) + "'");
    m.promotion = p->kind;
  }
  return m;
}

Bitboard GroundState::occupancy(Color c) const {
  Bitboard b = 0;
  for (Bitboard bb : pieces[index_of(c)]) b |= bb;
  return b;
}

std::optional<Piece> GroundState::piece_at(Square s) const {
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < kPieceKinds; ++k)
      if (test(pieces[c][k], s)) return Piece{static_cast<Color>(c), static_cast<PieceKind>(k)};
  return std::nullopt;
}

int GroundState::piece_count() const { return popcount(occupancy()); }

GroundState initial_state(int turn_cap) {
  return from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", turn_cap);
}

std::vector<Move> legal_moves(const GroundState& s) {
  require_ongoing(s);
  std::vector<Move> out;
  out.reserve(64);
  const Color us = s.side_to_move, them = opposite(us);
  const Bitboard own = s.occupancy(us), enemy = s.occupancy(them), occ = own | enemy;
  const auto& t = attack_tables();
  const auto& mine = s.pieces[index_of(us)];

  for (Bitboard pawns = mine[index_of(PieceKind::Pawn)]; pawns;) {
    const Square from = pop_lsb(pawns);
    const int one = from.index() + pawn_forward(us);
    if (one >= 0 && one < 64 && !test(occ, Square(one))) {
      add_pawn_move(out, from, Square(one), us);
      const int two = one + pawn_forward(us);
      if (from.rank() == pawn_start_rank(us) && !test(occ, Square(two))) out.push_back(Move::make(from, Square(two)));
    }
    Bitboard targets = t.pawn[index_of(us)][from.index()] & enemy;
    if (s.en_passant && test(s.pieces[index_of(them)][index_of(PieceKind::Pawn)],
                             Square::at(s.en_passant->file(), from.rank())))
      targets |= t.pawn[index_of(us)][from.index()] & bit(*s.en_passant) & ~occ;
    while (targets) add_pawn_move(out, from, pop_lsb(targets), us);
  }

  auto emit = [&](PieceKind kind, auto attacks) {
    for (Bitboard b = mine[index_of(kind)]; b;) {
      const Square from = pop_lsb(b);
      for (Bitboard to = attacks(from) & ~own; to;) out.push_back(Move::make(from, pop_lsb(to)));
    }
  };
  emit(PieceKind::Knight, [&](Square f) { return t.knight[f.index()]; });
  emit(PieceKind::Bishop, [&](Square f) { return bishop_attacks(f, occ); });
  emit(PieceKind::Rook, [&](Square f) { return rook_attacks(f, occ); });
  emit(PieceKind::Queen, [&](Square f) { return queen_attacks(f, occ); });
  emit(PieceKind::King, [&](Square f) { return t.king[f.index()]; });

  // Castling ignores attacked squares entirely.
  const int r = home_rank(us);
  const Square king_sq = Square::at(4, r);
  if (test(mine[index_of(PieceKind::King)], king_sq)) {
    const std::uint8_t ks = us == Color::White ? kWhiteKingside : kBlackKingside;
    const std::uint8_t qs = us == Color::White ? kWhiteQueenside : kBlackQueenside;
    if ((s.castling & ks) && test(mine[index_of(PieceKind::Rook)], Square::at(7, r)) &&
        !(occ & between(king_sq, Square::at(7, r))))
      out.push_back(Move::make(king_sq, Square::at(6, r)));
    if ((s.castling & qs) && test(mine[index_of(PieceKind::Rook)], Square::at(0, r)) &&
        !(occ & between(king_sq, Square::at(0, r))))
      out.push_back(Move::make(king_sq, Square::at(2, r)));
  }
  return out;
}

Move normalize_promotion(const GroundState& s, Move m) {
  if (m.is_pass || m.promotion) return m;
  const auto p = s.piece_at(m.from);
  if (p && p->kind == PieceKind::Pawn && p->color == s.side_to_move && m.to.rank() == last_rank(p->color) &&
      std::abs(m.to.file() - m.from.file()) <= 1)
    m.promotion = PieceKind::Queen;
  return m;
}

std::pair<GroundState, MoveOutcome> request_move(const GroundState& state, const Move& requested) {
  require_ongoing(state);
  GroundState next = state;
  MoveOutcome outcome;
  outcome.mover = state.side_to_move;
  outcome.requested = requested;

  if (requested.is_pass) {
    next.en_passant.reset();
    advance_turn(next);
    return {next, outcome};
  }

  const Move m = normalize_promotion(state, requested);
  const auto moves = legal_moves(state);
  if (std::find(moves.begin(), moves.end(), m) != moves.end()) {
    outcome.capture_square = execute(next, m);
    outcome.taken_move = m;
    return {next, outcome};
  }

  // Not legal as requested: decide between truncation and illegal.
  const Color us = state.side_to_move;
  const Bitboard own = state.occupancy(us), enemy = state.occupancy(opposite(us));
  const auto piece = state.piece_at(m.from);
  std::optional<Move> truncated;
  if (piece && piece->color == us && m.from != m.to) {
    const int dir = direction_between(m.from, m.to);
    const bool slides = (piece->kind == PieceKind::Queen && dir >= 0) ||
                        (piece->kind == PieceKind::Rook && dir >= 0 && !is_diagonal(dir)) ||
                        (piece->kind == PieceKind::Bishop && dir >= 0 && is_diagonal(dir));
    if (slides && !m.promotion) {
      const Bitboard path = between(m.from, m.to) & (own | enemy);
      if (path) {
        // First occupied square walking from the origin.
        const Bitboard first = ray_attacks(dir, m.from, own | enemy) & (own | enemy);
        if (first & enemy) truncated = Move::make(m.from, Square(std::countr_zero(first)));
      }
    } else if (piece->kind == PieceKind::Pawn && !m.promotion && m.to.file() == m.from.file() &&
               m.from.rank() == pawn_start_rank(us) && m.to.index() - m.from.index() == 2 * pawn_forward(us)) {
      const Square mid(m.from.index() + pawn_forward(us));
      if (!test(own | enemy, mid) && test(own | enemy, m.to)) truncated = Move::make(m.from, mid);
    }
  }

  if (truncated) {
    outcome.capture_square = execute(next, *truncated);
    outcome.taken_move = truncated;
    return {next, outcome};
  }

  outcome.was_illegal = true;
  next.en_passant.reset();
  advance_turn(next);
  return {next, outcome};
}

Bitboard sense_window(Square center) {
  return bit(center) | attack_tables().king[center.index()];
}

SenseOutcome apply_sense(const GroundState& state, Square center) {
  require_ongoing(state);
  SenseOutcome out{center, {}};
  for (Bitboard w = sense_window(center); w;) {
    const Square sq = pop_lsb(w);
    out.revealed.push_back({sq, state.piece_at(sq)});
  }
  return out;
}

std::optional<Square> capture_notice(const MoveOutcome& outcome, Color observer) {
  if (observer == outcome.mover) return std::nullopt;
  return outcome.capture_square;
}

std::optional<GameResult> is_terminal(const GroundState& s) {
  if (s.result) return s.result;
  if (!s.pieces[0][index_of(PieceKind::King)]) return GameResult{Color::Black, EndReason::KingCaptured};
  if (!s.pieces[1][index_of(PieceKind::King)]) return GameResult{Color::White, EndReason::KingCaptured};
  if (s.fullmove > s.turn_cap) return GameResult{std::nullopt, EndReason::TurnCapDraw};
  return std::nullopt;
}

std::string to_fen(const GroundState& s) {
  std::ostringstream out;
  for (int r = 7; r >= 0; --r) {
    int empty = 0;
    for (int f = 0; f < 8; ++f) {
      const auto p = s.piece_at(Square::at(f, r));
      if (!p) {
        ++empty;
        continue;
      }
      if (empty) out << empty;
      empty = 0;
      out << to_fen_char(*p);
    }
    if (empty) out << empty;
    if (r) out << '/';
  }
  out << ' ' << (s.side_to_move == Color::White ? 'w' : 'b') << ' ';
  if (!s.castling) out << '-';
  if (s.castling & kWhiteKingside) out << 'K';
  if (s.castling & kWhiteQueenside) out << 'Q';
  if (s.castling & kBlackKingside) out << 'k';
  if (s.castling & kBlackQueenside) out << 'q';
  out << ' ' << (s.en_passant ? s.en_passant->name() : "-") << " 0 " << s.fullmove << ' ';
  if (!s.result) {
    out << '*';
  } else if (!s.result->winner) {
    out << "1/2-1/2";
  } else {
    out << (*s.result->winner == Color::White ? "1-0" : "0-1");
  }
  return out.str();
}

GroundState from_fen(std::string_view fen, int turn_cap) {
  std::istringstream in{std::string(fen)};
  std::string placement, side, castling, ep, halfmove, fullmove, tag;
  if (!(in >> placement >> side >> castling >> ep)) throw MalformedInput("FEN needs at least four fields");
  in >> halfmove >> fullmove >> tag;

  GroundState s;
  s.turn_cap = turn_cap;
  int r = 7, f = 0;
  for (char c : placement) {
    if (c == '/') {
      if (f != 8 || r == 0) throw MalformedInput("bad FEN rank layout");
      --r;
      f = 0;
    } else if (c >= '1' && c <= '8') {
      f += c - '0';
    } else {
      const auto p = piece_from_fen_char(c);
      if (!p || f > 7) throw MalformedInput("bad FEN piece placement");
      s.pieces[index_of(p->color)][index_of(p->kind)] |= bit(Square::at(f, r));
      ++f;
    }
    if (f > 8) throw MalformedInput("bad FEN rank length");
  }
  if (r != 0 || f != 8) throw MalformedInput("FEN placement must describe 8 ranks");
  for (int c = 0; c < 2; ++c)
    if (popcount(s.pieces[c][index_of(PieceKind::King)]) > 1) throw MalformedInput("more than one king per side");

  if (side == "w") {
    s.side_to_move = Color::White;
  } else if (side == "b") {
    s.side_to_move = Color::Black;
  } else {
    throw MalformedInput("bad FEN side to move");
  }
  if (castling != "-") {
    for (char c : castling) {
      switch (c) {
        case 'K': s.castling |= kWhiteKingside; break;
        case 'Q': s.castling |= kWhiteQueenside; break;
        case 'k': s.castling |= kBlackKingside; break;
        case 'q': s.castling |= kBlackQueenside; break;
        default: throw MalformedInput("bad FEN castling field");
      }
    }
  }
  if (ep != "-") {
    s.en_passant = Square::parse(ep);
    if (s.en_passant->rank() != 2 && s.en_passant->rank() != 5) throw MalformedInput("en passant square must be on rank 3 or 6");
  }
  if (!fullmove.empty()) {
    try {
      s.fullmove = std::stoi(fullmove);
    } catch (const std::exception&) {
      throw MalformedInput("bad FEN fullmove counter");
    }
    if (s.fullmove < 1) throw MalformedInput("fullmove counter must be >= 1");
  }
  if (tag == "1-0") {
    s.result = GameResult{Color::White, EndReason::KingCaptured};
  } else if (tag == "0-1") {
    s.result = GameResult{Color::Black, EndReason::KingCaptured};
  } else if (tag == "1/2-1/2") {
    s.result = GameResult{std::nullopt, EndReason::TurnCapDraw};
  } else if (!tag.empty() && tag != "*") {
    throw MalformedInput("bad result tag: '" + tag + "'");
  }
  return s;
}

}  // namespace rbc
