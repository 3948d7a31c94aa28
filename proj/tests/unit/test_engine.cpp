#include <doctest.h>

#include <algorithm>
#include <set>

#include "engine/engine.hpp"
#include "support/naive_movegen.hpp"
#include "support/playout.hpp"

using namespace rbc;

namespace {

bool contains(const std::vector<Move>& moves, std::string_view uci) {
  const Move m = Move::parse_uci(uci);
  return std::find(moves.begin(), moves.end(), m) != moves.end();
}

std::set<std::string> as_uci(const std::vector<Move>& moves) {
  std::set<std::string> out;
  for (const auto& m : moves) out.insert(m.uci());
  return out;
}

}  // namespace

TEST_CASE("initial position") {
  const auto s = initial_state();
  CHECK(s.piece_count() == 32);
  CHECK(popcount(s.occupancy(Color::White)) == 16);
  CHECK(popcount(s.occupancy(Color::Black)) == 16);
  CHECK(s.side_to_move == Color::White);
  CHECK(s.pieces[0][index_of(PieceKind::Pawn)] == (kRank1 << 8));
  CHECK(s.castling == kAllCastling);
  CHECK_FALSE(s.result);
  CHECK(legal_moves(s).size() == 20);
  CHECK(to_fen(s) == "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1 *");
}

TEST_CASE("no check rules") {
  SUBCASE("king may step into a rook's line") {
    const auto s = from_fen("4r3/8/8/8/8/8/8/4K3 w - - 0 1");
    CHECK(contains(legal_moves(s), "e1e2"));
  }
  SUBCASE("castling through attacked squares") {
    const auto s = from_fen("5q2/8/8/8/8/8/8/4K2R w K - 0 1");
    CHECK(contains(legal_moves(s), "e1g1"));
  }
  SUBCASE("castling needs an empty path") {
    const auto s = from_fen("8/8/8/8/8/8/8/RN2K1NR w KQ - 0 1");
    CHECK_FALSE(contains(legal_moves(s), "e1g1"));
    CHECK_FALSE(contains(legal_moves(s), "e1c1"));
  }
}

TEST_CASE("legal_moves on a finished game throws") {
  auto s = initial_state();
  s.result = GameResult{Color::White, EndReason::KingCaptured};
  CHECK_THROWS_AS(legal_moves(s), GameOver);
  CHECK_THROWS_AS(request_move(s, Move::pass()), GameOver);
}

TEST_CASE("slider truncation captures the first enemy blocker") {
  const auto s = from_fen("rnbqkbnr/pppp1ppp/8/8/8/5p2/PPPP2PP/RNBQKBNR w KQkq - 0 1");
  const auto [next, out] = request_move(s, Move::parse_uci("d1h5"));
  REQUIRE(out.taken_move);
  CHECK(out.taken_move->uci() == "d1f3");
  REQUIRE(out.capture_square);
  CHECK(out.capture_square->name() == "f3");
  CHECK_FALSE(out.was_illegal);
  CHECK(next.piece_at(Square::parse("f3")) == Piece{Color::White, PieceKind::Queen});
  CHECK(next.side_to_move == Color::Black);
}

TEST_CASE("own-piece blocked slide is illegal") {
  const auto s = initial_state();
  const auto [next, out] = request_move(s, Move::parse_uci("d1d5"));
  CHECK(out.was_illegal);
  CHECK_FALSE(out.taken_move);
  CHECK(next.pieces == s.pieces);
  CHECK(next.side_to_move == Color::Black);
}

TEST_CASE("pass flips the side and leaves the board") {
  const auto s = initial_state();
  const auto [next, out] = request_move(s, Move::pass());
  CHECK(next.pieces == s.pieces);
  CHECK(next.side_to_move == Color::Black);
  CHECK_FALSE(out.was_illegal);
  CHECK_FALSE(out.taken_move);
}

TEST_CASE("pawn truncation table") {
  SUBCASE("double push with blocked intermediate square is illegal") {
    const auto s = from_fen("rnbqkbnr/pppppppp/8/8/8/4n3/PPPPPPPP/RNBQKBNR w KQkq - 0 1");
    const auto [next, out] = request_move(s, Move::parse_uci("e2e4"));
    CHECK(out.was_illegal);
    CHECK(next.pieces == s.pieces);
  }
  SUBCASE("double push onto an occupied square becomes a single push") {
    const auto s = from_fen("rnbqkbnr/pppppppp/8/8/4n3/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1");
    const auto [next, out] = request_move(s, Move::parse_uci("e2e4"));
    REQUIRE(out.taken_move);
    CHECK(out.taken_move->uci() == "e2e3");
    CHECK_FALSE(out.capture_square);
    CHECK_FALSE(next.en_passant);
  }
  SUBCASE("single push into an occupied square is illegal") {
    const auto s = from_fen("rnbqkbnr/pppppppp/8/8/8/4n3/PPPPPPPP/RNBQKBNR w KQkq - 0 1");
    CHECK(request_move(s, Move::parse_uci("e2e3")).second.was_illegal);
  }
  SUBCASE("diagonal to an empty square is illegal") {
    CHECK(request_move(initial_state(), Move::parse_uci("e2d3")).second.was_illegal);
  }
  SUBCASE("blocked castling is illegal") {
    const auto s = from_fen("4k3/8/8/8/8/8/8/4K1nR w K - 0 1");
    CHECK(request_move(s, Move::parse_uci("e1g1")).second.was_illegal);
  }
}

TEST_CASE("en passant capture square is the pawn's square") {
  auto s = from_fen("4k3/3p4/8/4P3/8/8/8/4K3 b - - 0 1");
  s = request_move(s, Move::parse_uci("d7d5")).first;
  REQUIRE(s.en_passant);
  CHECK(s.en_passant->name() == "d6");
  const auto [next, out] = request_move(s, Move::parse_uci("e5d6"));
  REQUIRE(out.capture_square);
  CHECK(out.capture_square->name() == "d5");
  CHECK(capture_notice(out, Color::Black)->name() == "d5");
  CHECK_FALSE(capture_notice(out, Color::White));
  CHECK_FALSE(next.piece_at(Square::parse("d5")));
}

TEST_CASE("capture notices") {
  const auto s = from_fen("rnbqkbnr/pppp1ppp/8/8/8/5p2/PPPP2PP/RNBQKBNR w KQkq - 0 1");
  const auto out = request_move(s, Move::parse_uci("d1h5")).second;
  CHECK(capture_notice(out, Color::Black)->name() == "f3");
  const auto quiet = request_move(initial_state(), Move::parse_uci("g1f3")).second;
  CHECK_FALSE(capture_notice(quiet, Color::Black));
}

TEST_CASE("king capture ends the game") {
  const auto s = from_fen("4k3/8/8/8/8/8/8/4R1K1 w - - 0 1");
  const auto [fin, out] = request_move(s, Move::parse_uci("e1e8"));
  CHECK(out.capture_square == Square::parse("e8"));
  REQUIRE(fin.result);
  CHECK(fin.result->winner == Color::White);
  CHECK(fin.result->reason == EndReason::KingCaptured);
  CHECK(is_terminal(fin) == fin.result);
}

TEST_CASE("is_terminal") {
  CHECK_FALSE(is_terminal(initial_state()));
  const auto missing = from_fen("8/8/8/8/8/8/8/4K3 w - - 0 1");
  const auto r = is_terminal(missing);
  REQUIRE(r);
  CHECK(r->winner == Color::White);
  CHECK(r->reason == EndReason::KingCaptured);
  const auto capped = from_fen("4k3/8/8/8/8/8/8/4K3 w - - 0 201");
  REQUIRE(is_terminal(capped));
  CHECK_FALSE(is_terminal(capped)->winner);
  CHECK(is_terminal(capped)->reason == EndReason::TurnCapDraw);
}

TEST_CASE("turn cap draws after 200 full moves") {
  GroundState s = from_fen("4k3/8/8/8/8/8/8/4K3 w - - 0 200");
  s = request_move(s, Move::pass()).first;
  CHECK_FALSE(s.result);
  s = request_move(s, Move::pass()).first;
  REQUIRE(s.result);
  CHECK(s.result->reason == EndReason::TurnCapDraw);
}

TEST_CASE("sense windows are clipped at the edges") {
  const auto s = initial_state();
  CHECK(apply_sense(s, Square::parse("g7")).revealed.size() == 9);
  CHECK(apply_sense(s, Square::parse("h8")).revealed.size() == 4);
  const auto e4 = apply_sense(s, Square::parse("e4"));
  CHECK(e4.revealed.size() == 9);
  CHECK(std::all_of(e4.revealed.begin(), e4.revealed.end(), [](const SensedSquare& r) { return !r.piece; }));
  CHECK(e4.revealed.front().square.name() == "d3");
  CHECK(e4.revealed.back().square.name() == "f5");
  for (int i = 0; i < 64; ++i) {
    const Square c(i);
    const bool fe = c.file() == 0 || c.file() == 7, re = c.rank() == 0 || c.rank() == 7;
    const std::size_t expect = fe && re ? 4 : (fe || re ? 6 : 9);
    CHECK(apply_sense(s, c).revealed.size() == expect);
  }
}

TEST_CASE("malformed input is distinct from illegal") {
  CHECK_THROWS_AS(Square(64), MalformedInput);
  CHECK_THROWS_AS(Move::parse_uci("z9a1"), MalformedInput);
  CHECK_THROWS_AS(Move::parse_uci("e7e8k"), MalformedInput);
  CHECK_THROWS_AS(from_fen("not a fen"), MalformedInput);
}

TEST_CASE("promotion defaults to queen") {
  const auto s = from_fen("4k3/P7/8/8/8/8/8/4K3 w - - 0 1");
  const auto out = request_move(s, Move::parse_uci("a7a8")).second;
  REQUIRE(out.taken_move);
  CHECK(out.taken_move->uci() == "a7a8q");
  const auto under = request_move(s, Move::parse_uci("a7a8n"));
  CHECK(under.first.piece_at(Square::parse("a8")) == Piece{Color::White, PieceKind::Knight});
}

TEST_CASE("FEN round trip over playouts") {
  for (const auto& s : testing::sample_states(300, 11)) {
    const auto back = from_fen(to_fen(s));
    CHECK(back.pieces == s.pieces);
    CHECK(back.castling == s.castling);
    CHECK(back.en_passant == s.en_passant);
    CHECK(back.fullmove == s.fullmove);
    CHECK(back.side_to_move == s.side_to_move);
  }
}

TEST_CASE("legal_moves matches the naive ray-walking generator") {
  for (const auto& s : testing::sample_states(1000, 2024)) {
    const auto expect = testing::naive_moves(testing::naive_from_fen(to_fen(s)));
    REQUIRE(as_uci(legal_moves(s)) == expect);
  }
}

TEST_CASE("playout invariants") {
  std::mt19937_64 rng(7);
  GroundState s = initial_state();
  int games = 0;
  for (int step = 0; step < 100000; ++step) {
    if (s.result) {
      s = initial_state();
      ++games;
      continue;
    }
    const int before = s.piece_count();
    const auto [next, out] = request_move(s, testing::random_request(s, rng));
    Bitboard seen = 0;
    bool disjoint = true;
    for (const auto& side : next.pieces)
      for (Bitboard bb : side) {
        disjoint &= (seen & bb) == 0;
        seen |= bb;
      }
    REQUIRE(disjoint);
    REQUIRE(popcount(next.pieces[0][index_of(PieceKind::King)]) <= 1);
    REQUIRE(popcount(next.pieces[1][index_of(PieceKind::King)]) <= 1);
    REQUIRE(next.piece_count() == before - (out.capture_square ? 1 : 0));
    if (out.was_illegal) {
      REQUIRE(next.pieces == s.pieces);
      REQUIRE(next.side_to_move != s.side_to_move);
    }
    if (!next.pieces[0][index_of(PieceKind::King)] || !next.pieces[1][index_of(PieceKind::King)]) REQUIRE(next.result);
    if (next.en_passant) REQUIRE((next.en_passant->rank() == 2 || next.en_passant->rank() == 5));
    REQUIRE(next.fullmove <= kDefaultTurnCap + 1);
    s = next;
  }
  CHECK(games > 10);
}

TEST_CASE("apply_sense never mutates") {
  for (const auto& s : testing::sample_states(50, 3)) {
    const GroundState copy = s;
    for (int c = 0; c < 64; ++c) (void)apply_sense(s, Square(c));
    CHECK(copy == s);
  }
}
