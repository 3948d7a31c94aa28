#pragma once

// Test-only oracle: mailbox board driven purely from FEN text, step-by-step
// ray walking, no bitboards. Generates the geometry-legal move set (no check
// rules) as sorted UCI strings.

#include <array>
#include <cctype>
#include <set>
#include <sstream>
#include <string>

namespace rbc::testing {

struct NaiveBoard {
  std::array<char, 64> cell{};  // '.' for empty, FEN letters otherwise
  bool white_to_move = true;
  std::string castling;
  int ep = -1;
};

inline NaiveBoard naive_from_fen(const std::string& fen) {
  NaiveBoard b;
  b.cell.fill('.');
  std::istringstream in(fen);
  std::string placement, side, castling, ep;
  in >> placement >> side >> castling >> ep;
  int rank = 7, file = 0;
  for (char c : placement) {
    if (c == '/') {
      --rank;
      file = 0;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      file += c - '0';
    } else {
      b.cell[rank * 8 + file] = c;
      ++file;
    }
  }
  b.white_to_move = side == "w";
  b.castling = castling == "-" ? "" : castling;
  if (ep != "-") b.ep = (ep[1] - '1') * 8 + (ep[0] - 'a');
  return b;
}

inline std::set<std::string> naive_moves(const NaiveBoard& b) {
  std::set<std::string> out;
  auto name = [](int f, int r) { return std::string{char('a' + f), char('1' + r)}; };
  auto own = [&](char c) { return c != '.' && (std::isupper(static_cast<unsigned char>(c)) != 0) == b.white_to_move; };
  auto enemy = [&](char c) { return c != '.' && !own(c); };
  auto at = [&](int f, int r) { return b.cell[r * 8 + f]; };
  auto inside = [](int f, int r) { return f >= 0 && f < 8 && r >= 0 && r < 8; };
  auto add = [&](int f0, int r0, int f1, int r1, const char* promos = nullptr) {
    const std::string base = name(f0, r0) + name(f1, r1);
    if (promos) {
      for (const char* p = promos; *p; ++p) out.insert(base + *p);
    } else {
      out.insert(base);
    }
  };

  const int dir = b.white_to_move ? 1 : -1;
  const int start_rank = b.white_to_move ? 1 : 6;
  const int promo_rank = b.white_to_move ? 7 : 0;
  for (int r = 0; r < 8; ++r) {
    for (int f = 0; f < 8; ++f) {
      const char c = at(f, r);
      if (!own(c)) continue;
      const char kind = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (kind == 'p') {
        const int r1 = r + dir;
        const char* promos = r1 == promo_rank ? "qrbn" : nullptr;
        if (inside(f, r1) && at(f, r1) == '.') {
          add(f, r, f, r1, promos);
          if (r == start_rank && at(f, r + 2 * dir) == '.') add(f, r, f, r + 2 * dir);
        }
        for (int df : {-1, 1}) {
          const int f1 = f + df;
          if (!inside(f1, r1)) continue;
          if (enemy(at(f1, r1))) add(f, r, f1, r1, promos);
          const char victim = inside(f1, r) ? at(f1, r) : '.';
          if (r1 * 8 + f1 == b.ep && at(f1, r1) == '.' && enemy(victim) &&
              std::tolower(static_cast<unsigned char>(victim)) == 'p')
            add(f, r, f1, r1);
        }
      } else if (kind == 'n' || kind == 'k') {
        static const int kn[8][2] = {{1, 2}, {2, 1}, {2, -1}, {1, -2}, {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}};
        static const int kg[8][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}};
        const auto& deltas = kind == 'n' ? kn : kg;
        for (const auto& d : deltas) {
          const int f1 = f + d[0], r1 = r + d[1];
          if (inside(f1, r1) && !own(at(f1, r1))) add(f, r, f1, r1);
        }
      } else {
        static const int dirs[8][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}};
        for (const auto& d : dirs) {
          const bool diag = d[0] != 0 && d[1] != 0;
          if (kind == 'b' && !diag) continue;
          if (kind == 'r' && diag) continue;
          for (int f1 = f + d[0], r1 = r + d[1]; inside(f1, r1); f1 += d[0], r1 += d[1]) {
            if (own(at(f1, r1))) break;
            add(f, r, f1, r1);
            if (enemy(at(f1, r1))) break;
          }
        }
      }
    }
  }

  const int home = b.white_to_move ? 0 : 7;
  const char king = b.white_to_move ? 'K' : 'k', rook = b.white_to_move ? 'R' : 'r';
  if (at(4, home) == king) {
    const char ks = b.white_to_move ? 'K' : 'k', qs = b.white_to_move ? 'Q' : 'q';
    if (b.castling.find(ks) != std::string::npos && at(7, home) == rook && at(5, home) == '.' && at(6, home) == '.')
      add(4, home, 6, home);
    if (b.castling.find(qs) != std::string::npos && at(0, home) == rook && at(1, home) == '.' &&
        at(2, home) == '.' && at(3, home) == '.')
      add(4, home, 2, home);
  }
  return out;
}

}  // namespace rbc::testing
