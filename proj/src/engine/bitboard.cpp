#include "engine/bitboard.hpp"

#include <cstdlib>

namespace rbc {

namespace {

AttackTables build_tables() {
  AttackTables t;
  constexpr int knight_df[8] = {1, 2, 2, 1, -1, -2, -2, -1};
  constexpr int knight_dr[8] = {2, 1, -1, -2, -2, -1, 1, 2};
  for (int s = 0; s < 64; ++s) {
    const int f = s % 8, r = s / 8;
    for (int k = 0; k < 8; ++k) {
      const int nf = f + knight_df[k], nr = r + knight_dr[k];
      if (nf >= 0 && nf < 8 && nr >= 0 && nr < 8) t.knight[s] |= bit(nr * 8 + nf);
    }
    for (int d = 0; d < 8; ++d) {
      const int nf = f + kDirFile[d], nr = r + kDirRank[d];
      if (nf >= 0 && nf < 8 && nr >= 0 && nr < 8) t.king[s] |= bit(nr * 8 + nf);
      for (int step = 1;; ++step) {
        const int rf = f + kDirFile[d] * step, rr = r + kDirRank[d] * step;
        if (rf < 0 || rf > 7 || rr < 0 || rr > 7) break;
        t.ray[d][s] |= bit(rr * 8 + rf);
      }
    }
    for (int df : {-1, 1}) {
      const int nf = f + df;
      if (nf < 0 || nf > 7) continue;
      if (r < 7) t.pawn[0][s] |= bit((r + 1) * 8 + nf);
      if (r > 0) t.pawn[1][s] |= bit((r - 1) * 8 + nf);
    }
  }
  return t;
}

// N, NE, E and NW step towards higher indices.
constexpr bool kPositive[8] = {true, true, true, false, false, false, false, true};

}  // namespace

const AttackTables& attack_tables() {
  static const AttackTables tables = build_tables();
  return tables;
}

Bitboard ray_attacks(int dir, Square from, Bitboard occupied) {
  const auto& t = attack_tables();
  const Bitboard ray = t.ray[dir][from.index()];
  const Bitboard blockers = ray & occupied;
  if (blockers == 0) return ray;
  const int first = kPositive[dir] ? std::countr_zero(blockers) : 63 - std::countl_zero(blockers);
  return ray & ~t.ray[dir][first];
}

Bitboard bishop_attacks(Square from, Bitboard occupied) {
  return ray_attacks(1, from, occupied) | ray_attacks(3, from, occupied) | ray_attacks(5, from, occupied) |
         ray_attacks(7, from, occupied);
}

Bitboard rook_attacks(Square from, Bitboard occupied) {
  return ray_attacks(0, from, occupied) | ray_attacks(2, from, occupied) | ray_attacks(4, from, occupied) |
         ray_attacks(6, from, occupied);
}

Bitboard queen_attacks(Square from, Bitboard occupied) {
  return bishop_attacks(from, occupied) | rook_attacks(from, occupied);
}

int direction_between(Square a, Square b) {
  if (a == b) return -1;
  const int df = b.file() - a.file(), dr = b.rank() - a.rank();
  if (df != 0 && dr != 0 && std::abs(df) != std::abs(dr)) return -1;
  const int sf = (df > 0) - (df < 0), sr = (dr > 0) - (dr < 0);
  for (int d = 0; d < 8; ++d) {
    if (kDirFile[d] == sf && kDirRank[d] == sr) return d;
  }
  return -1;
}

Bitboard between(Square a, Square b) {
  const int d = direction_between(a, b);
  if (d < 0) return 0;
  const auto& t = attack_tables();
  return t.ray[d][a.index()] & ~t.ray[d][b.index()] & ~bit(b);
}

}  // namespace rbc
