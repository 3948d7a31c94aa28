#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/net_agent.hpp"
#include "game/runner.hpp"

namespace rbc::arena {

// "random", "greedy", or "net:<checkpoint>" with optional "@" options:
// "net:ckpt.bin@sample=0.7,mask". Net bots default to argmax.
struct BotSpec {
  enum class Kind { Random, Greedy, Net };
  Kind kind = Kind::Random;
  std::string checkpoint;
  NetPolicy policy;

  static BotSpec parse(const std::string& text);  // throws std::invalid_argument
  std::string str() const;
};

// Loads each distinct checkpoint once and shares it read-only.
class BotFactory {
 public:
  std::unique_ptr<Agent> make(const BotSpec& spec, std::uint64_t seed);
  std::shared_ptr<const nn::PolicyValueNet<float>> network(const std::string& checkpoint);

 private:
  std::map<std::string, std::shared_ptr<const nn::PolicyValueNet<float>>> nets_;
};

// Plays the first `turns` turns with a random bot, then hands over.
class RandomOpening : public Agent {
 public:
  RandomOpening(std::unique_ptr<Agent> inner, int turns, std::uint64_t seed);
  Square choose_sense(const enc::PlayerView& view) override;
  Move choose_move(const enc::PlayerView& view) override;
  void game_over(const enc::PlayerView& view, const GameResult& result) override;

 private:
  std::unique_ptr<Agent> inner_;
  std::unique_ptr<Agent> opening_;
  int turns_;
};

struct MatchOptions {
  int games = 100;
  std::uint64_t seed = 1;
  int turn_cap = kDefaultTurnCap;
  // Random opening turns per side; makes argmax-vs-argmax games differ.
  int opening_turns = 0;
  int threads = 0;  // 0 = hardware concurrency
};

struct GameSummary {
  int index = 0;
  bool a_white = true;
  double a_score = 0;  // 1 win, 0.5 draw, 0 loss
  int turns = 0;       // fullmoves played
  std::string reason;
  std::string final_fen;
};

struct MatchResult {
  std::string a, b;
  int games = 0, wins = 0, draws = 0, losses = 0;
  int white_wins = 0, white_draws = 0, white_losses = 0;  // A's record as white
  int black_wins = 0, black_draws = 0, black_losses = 0;
  double mean_length = 0;
  double score = 0;  // draws count half
  double wilson_low = 0, wilson_high = 0;
  std::vector<GameSummary> per_game;

  nlohmann::json to_json() const;
  std::string table() const;
};

// 95% Wilson score interval for a proportion p over n trials.
std::pair<double, double> wilson_interval(double p, int n, double z = 1.959963984540054);

// 400 log10(w / (1 - w)); throws std::invalid_argument unless 0 < w < 1.
double relative_elo(double win_rate);

// Per-game seed: independent streams derived from the match seed.
std::uint64_t game_seed(std::uint64_t match_seed, int game, int stream);

using AgentMaker = std::function<std::unique_ptr<Agent>(std::uint64_t seed)>;

// Core match loop over agent makers; makers must be safe to call from
// several threads at once. Any n >= 1 is accepted here.
MatchResult run_games(const AgentMaker& a, const AgentMaker& b, const MatchOptions& options);

// Colours alternate (A white in even games). Bit-reproducible for fixed
// seeds regardless of thread count. Throws std::invalid_argument if games is
// odd or < 2.
MatchResult run_match(const BotSpec& a, const BotSpec& b, const MatchOptions& options, BotFactory* factory = nullptr);

}  // namespace rbc::arena
