#include "sl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace rbc::sl {

IngestReport ingest_stream(std::istream& in, int turn_cap) {
  IngestReport report;
  std::string line;
  while (std::getline(in, line)) {
    ++report.lines;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(report.lines) + ": ";
    try {
      GameRecord record = record_from_json(nlohmann::json::parse(line));
      const auto check = validate_record(record, turn_cap);
      if (!check.ok) {
        report.rejected.push_back(where + "replay divergence: " + check.reason);
        continue;
      }
      report.records.push_back(std::move(record));
    } catch (const nlohmann::json::exception& e) {
      report.rejected.push_back(where + "parse error: " + e.what());
    } catch (const std::exception& e) {
      report.rejected.push_back(where + "invalid record: " + e.what());
    }
  }
  return report;
}

IngestReport ingest(const std::filesystem::path& path, int turn_cap) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return ingest_stream(in, turn_cap);
}

int value_for(const GameResult& result, Color c) {
  if (!result.winner) return 0;
  return *result.winner == c ? 1 : -1;
}

namespace {

int move_target_for(const TurnEntry& t, MoveTarget mode) {
  if (mode == MoveTarget::Requested) return static_cast<int>(enc::encode_move_index(t.requested_move).value);
  if (!t.taken_move) return enc::kPassIndex;
  return static_cast<int>(enc::encode_move_index(*t.taken_move).value);
}

enc::PlaneStack stack_at(const std::vector<enc::Observation>& frames, std::size_t turn, enc::Stage stage) {
  const std::size_t first = turn > enc::kHistoryFrames - 1 ? turn - (enc::kHistoryFrames - 1) : 0;
  return enc::encode_window(std::span(frames).subspan(first, turn - first), frames[turn], stage);
}

}  // namespace

std::vector<TrainExample> make_examples(const GameRecord& record, MoveTarget target) {
  std::vector<TrainExample> out;
  for (Color c : {Color::White, Color::Black}) {
    const int value = value_for(record.result, c);
    replay_stream(record, c, [&](const enc::PlayerView& view, const TurnEntry& t, enc::Stage stage) {
      if (stage == enc::Stage::PreSense)
        out.push_back({view.stack(stage), ExampleKind::Sense, t.sense.index(), value});
      else
        out.push_back({view.stack(stage), ExampleKind::Move, move_target_for(t, target), value});
    });
  }
  return out;
}

void ExampleSet::add(const GameRecord& record, MoveTarget target) {
  for (Color c : {Color::White, Color::Black}) {
    PlayerGame g;
    g.game_id = record.id;
    g.color = c;
    g.value = static_cast<std::int8_t>(value_for(record.result, c));
    replay_stream(record, c, [&](const enc::PlayerView& view, const TurnEntry& t, enc::Stage stage) {
      if (stage == enc::Stage::PreSense) {
        // The previous turn's frame is complete now that its move is known.
        if (!g.frames.empty()) g.frames.back() = view.log().back();
        return;
      }
      g.frames.push_back(view.history().current());
      g.sense_targets.push_back(static_cast<std::int16_t>(t.sense.index()));
      g.move_targets.push_back(static_cast<std::int16_t>(move_target_for(t, target)));
    });
    const auto n = g.frames.size();
    if (n == 0) continue;
    const auto gi = static_cast<std::uint32_t>(games_.size());
    for (std::size_t t = 0; t < n; ++t) {
      refs_.push_back({gi, static_cast<std::uint16_t>(t), ExampleKind::Sense});
      refs_.push_back({gi, static_cast<std::uint16_t>(t), ExampleKind::Move});
    }
    games_.push_back(std::move(g));
  }
}

TrainExample ExampleSet::materialize(const Ref& ref) const {
  const PlayerGame& g = games_.at(ref.game);
  const bool sense = ref.kind == ExampleKind::Sense;
  return {stack_at(g.frames, ref.turn, sense ? enc::Stage::PreSense : enc::Stage::PreMove), ref.kind,
          sense ? g.sense_targets[ref.turn] : g.move_targets[ref.turn], g.value};
}

std::pair<std::vector<GameRecord>, std::vector<GameRecord>> split(std::vector<GameRecord> games, double fraction,
                                                                  std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split fraction must be in (0, 1)");
  std::vector<std::size_t> order(games.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(games.size())));
  std::pair<std::vector<GameRecord>, std::vector<GameRecord>> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? out.first : out.second).push_back(std::move(games[order[i]]));
  return out;
}

}  // namespace rbc::sl
