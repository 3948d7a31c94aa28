#pragma once

#include <filesystem>
#include <ostream>

#include "arena/match.hpp"

namespace rbc::sl {

struct SyntheticOptions {
  arena::BotSpec a = arena::BotSpec::parse("greedy");
  arena::BotSpec b = arena::BotSpec::parse("greedy");
  int games = 100;
  std::uint64_t seed = 1;
  int turn_cap = kDefaultTurnCap;
};

// Referee-driven games between scripted bots, one JSON record per line.
// Colours alternate; each game's bot seeds derive from (seed, game index),
// so the output is byte-identical for a fixed seed.
void gen_synthetic(const SyntheticOptions& options, std::ostream& out);
void gen_synthetic(const SyntheticOptions& options, const std::filesystem::path& path);

}  // namespace rbc::sl
