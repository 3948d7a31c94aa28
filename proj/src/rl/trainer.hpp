#pragma once

#include <filesystem>
#include <functional>
#include <memory>

#include <json.hpp>

#include "arena/match.hpp"
#include "rl/pool.hpp"
#include "rl/ppo.hpp"

namespace rbc::rl {

struct RlConfig {
  PpoConfig ppo;
  PoolConfig pool;
  int games_per_iteration = 32;
  int iterations = 1000000;        // upper bound; the time budget usually ends the run first
  double time_budget_seconds = 0;  // 0 = no limit
  std::uint64_t seed = 1;
  int turn_cap = kDefaultTurnCap;
  int checkpoint_every = 10;       // iterations; 0 = only at the end
  int record_every = 50;           // keep every Nth episode's game record; 0 = none
  int threads = 0;                 // self-play workers; 0 = hardware concurrency

  void validate() const;
};

nlohmann::json to_json(const RlConfig& c);
RlConfig rl_config_from_json(const nlohmann::json& j);

struct IterationLog {
  int iteration = 0;
  long games = 0;
  double trainer_score = 0;  // this iteration
  double aggregate_win_rate = 0;
  std::vector<std::pair<std::string, double>> opponent_win_rates;
  std::size_t pool_size = 0;
  bool snapshot = false;
  UpdateStats update;
  double seconds = 0;
  nlohmann::json to_json() const;
};

struct RlResult {
  std::shared_ptr<nn::PolicyValueNet<float>> net;
  int iterations = 0;
  long games = 0;
  std::size_t pool_size = 0;
  std::filesystem::path final_checkpoint;
};

using IterationCallback = std::function<void(const IterationLog&)>;

// Self-play PPO from `initial` (which also seeds the pool and the critic).
// Writes config.json, metrics.jsonl, checkpoints/ and games.jsonl under
// run_dir.
RlResult run_rl(const nn::PolicyValueNet<float>& initial, const RlConfig& config,
                const std::filesystem::path& run_dir, const IterationCallback& on_iteration = {});

// Argmax against argmax, alternating colours, wins + draws / 2 over n.
// Throws std::invalid_argument for n < 1.
double eval_matchup(std::shared_ptr<const nn::PolicyValueNet<float>> a, std::shared_ptr<const nn::PolicyValueNet<float>> b,
                    int games, std::uint64_t seed, int opening_turns = 0, int threads = 0);

}  // namespace rbc::rl
