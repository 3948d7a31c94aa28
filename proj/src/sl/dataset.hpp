#pragma once

// Supervised examples. Each player's game is kept as its list of
// observation frames, and input stacks are rebuilt when a batch needs them:
// two examples per player per turn would otherwise cost ~8 KB each.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "encoding/observation.hpp"
#include "game/record.hpp"

namespace rbc::sl {

enum class ExampleKind : std::uint8_t { Sense, Move };

// Which move the move head imitates: the player's request, or the move the
// referee actually executed (pass index when nothing moved).
enum class MoveTarget { Requested, Taken };

struct TrainExample {
  enc::PlaneStack input;
  ExampleKind kind;
  int target;        // SenseIndex for Sense, MoveIndex for Move
  int value_target;  // -1, 0, +1 from the player's perspective
};

struct IngestReport {
  std::vector<GameRecord> records;
  std::vector<std::string> rejected;  // "line N: reason"
  long lines = 0;
};

// Reads a JSON Lines file; every record is referee-validated. Invalid lines
// are reported, not fatal. Throws std::runtime_error if the file is unreadable.
IngestReport ingest(const std::filesystem::path& path, int turn_cap = kDefaultTurnCap);
IngestReport ingest_stream(std::istream& in, int turn_cap = kDefaultTurnCap);

int value_for(const GameResult& result, Color c);

// Built from that player's own turn entries only.
std::vector<TrainExample> make_examples(const GameRecord& record, MoveTarget target = MoveTarget::Requested);

struct PlayerGame {
  std::string game_id;
  Color color = Color::White;
  std::vector<enc::Observation> frames;  // one per turn
  std::vector<std::int16_t> sense_targets, move_targets;
  std::int8_t value = 0;
};

class ExampleSet {
 public:
  struct Ref {
    std::uint32_t game;
    std::uint16_t turn;
    ExampleKind kind;
  };

  void add(const GameRecord& record, MoveTarget target = MoveTarget::Requested);

  std::size_t size() const { return refs_.size(); }
  bool empty() const { return refs_.empty(); }
  const std::vector<Ref>& refs() const { return refs_; }
  const std::vector<PlayerGame>& games() const { return games_; }

  TrainExample materialize(const Ref& ref) const;
  TrainExample operator[](std::size_t i) const { return materialize(refs_[i]); }

 private:
  std::vector<PlayerGame> games_;
  std::vector<Ref> refs_;
};

// Deterministic split by game (not by example). The train side gets
// round(fraction * n) games. Throws std::invalid_argument unless 0 < fraction < 1.
std::pair<std::vector<GameRecord>, std::vector<GameRecord>> split(std::vector<GameRecord> games, double fraction,
                                                                  std::uint64_t seed);

}  // namespace rbc::sl
