#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rbc {

enum class Color : std::uint8_t { White = 0, Black = 1 };

constexpr Color opposite(Color c) { return c == Color::White ? Color::Black : Color::White; }
constexpr int index_of(Color c) { return static_cast<int>(c); }
std::string_view to_string(Color c);

enum class PieceKind : std::uint8_t { Pawn = 0, Knight, Bishop, Rook, Queen, King };

constexpr int kPieceKinds = 6;
constexpr int index_of(PieceKind k) { return static_cast<int>(k); }

struct Piece {
  Color color;
  PieceKind kind;

  friend bool operator==(const Piece&, const Piece&) = default;
};

// FEN letter: uppercase for white.
char to_fen_char(Piece p);
std::optional<Piece> piece_from_fen_char(char c);

// Thrown for requests that are structurally invalid (as opposed to
// well-formed but illegal moves, which the referee consumes as a pass).
class MalformedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when an operation requires an ongoing game.
class GameOver : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Square {
 public:
  constexpr Square() = default;
  constexpr explicit Square(int index) : index_(static_cast<std::int8_t>(index)) {
    if (index < 0 || index > 63) throw MalformedInput("square index out of range: " + std::to_string(index));
  }
  static constexpr Square at(int file, int rank) {
    if (file < 0 || file > 7 || rank < 0 || rank > 7) throw MalformedInput("file/rank out of range");
    return Square(rank * 8 + file);
  }
  static Square parse(std::string_view name);

  constexpr int index() const { return index_; }
  constexpr int file() const { return index_ % 8; }
  constexpr int rank() const { return index_ / 8; }
  std::string name() const;

  friend constexpr bool operator==(Square, Square) = default;
  friend constexpr auto operator<=>(Square, Square) = default;

 private:
  std::int8_t index_ = 0;
};

struct Move {
  Square from;
  Square to;
  std::optional<PieceKind> promotion;
  bool is_pass = false;

  static Move pass() { return Move{Square{}, Square{}, std::nullopt, true}; }
  static Move make(Square from, Square to, std::optional<PieceKind> promo = std::nullopt) {
    return Move{from, to, promo, false};
  }

  // UCI long algebraic ("e2e4", "e7e8q"); the pass is written "pass".
  std::string uci() const;
  static Move parse_uci(std::string_view text);

  friend bool operator==(const Move& a, const Move& b) {
    if (a.is_pass || b.is_pass) return a.is_pass == b.is_pass;
    return a.from == b.from && a.to == b.to && a.promotion == b.promotion;
  }
  friend bool operator<(const Move& a, const Move& b) {
    auto key = [](const Move& m) {
      return m.is_pass ? -1 : (m.from.index() * 64 + m.to.index()) * 8 + (m.promotion ? index_of(*m.promotion) + 1 : 0);
    };
    return key(a) < key(b);
  }
};

}  // namespace rbc
