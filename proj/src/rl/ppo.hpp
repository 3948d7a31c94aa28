#pragma once

#include <memory>
#include <random>
#include <vector>

#include <json.hpp>

#include "arena/net_agent.hpp"
#include "game/record.hpp"
#include "nn/adam.hpp"
#include "nn/network.hpp"

namespace rbc::rl {

enum class Head : std::uint8_t { Sense, Move };

struct TrajectoryStep {
  enc::PlaneStack input;
  Head head = Head::Sense;
  Color color = Color::White;  // selects the move mask
  int action = 0;
  float logprob = 0;
  float value_pred = 0;
  float reward = 0;
  float advantage = 0;
  float return_ = 0;
};

struct Episode {
  std::vector<TrajectoryStep> steps;  // trainer decisions only: sense, move, sense, move, ...
  GameRecord record;
  Color trainer_color = Color::White;
  double trainer_score = 0;  // 1 win, 0.5 draw, 0 loss
};

struct PpoConfig {
  double clip = 0.2;
  double gamma = 0.997;
  double lambda = 0.95;
  int epochs = 4;
  int minibatch = 256;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double learning_rate = 3e-4;
  double max_grad_norm = 0.5;  // 0 disables
  double temperature = 1.0;    // trainer sampling temperature

  void validate() const;
};

nlohmann::json to_json(const PpoConfig& c);
// Missing keys keep their defaults; unknown keys throw std::invalid_argument.
PpoConfig ppo_config_from_json(const nlohmann::json& j);

// The trainer samples both heads; the opponent plays argmax. Histories are
// built from each side's own observation stream only.
Episode play_episode(std::shared_ptr<const nn::PolicyValueNet<float>> trainer,
                     std::shared_ptr<const nn::PolicyValueNet<float>> opponent, Color trainer_color,
                     std::uint64_t seed, int turn_cap = kDefaultTurnCap, double temperature = 1.0);

// Terminal pair (last sense, last move) gets +1 on a win and -1 on a loss;
// every other step, and every step of a draw, gets 0.
void assign_rewards(std::vector<TrajectoryStep>& steps, double trainer_score);

// GAE over the episode's step sequence, sense and move steps treated as
// consecutive decisions; the last step is terminal. Sets raw advantages and
// returns = advantage + value_pred.
void compute_gae(std::vector<TrajectoryStep>& steps, double gamma, double lambda);

// Zero mean, unit variance over the batch (mean removal only if the
// variance is ~0).
void normalize_advantages(std::vector<TrajectoryStep>& steps);

struct UpdateStats {
  double sense_policy_loss = 0, move_policy_loss = 0, value_loss = 0;
  double sense_entropy = 0, move_entropy = 0;
  double clip_fraction = 0, approx_kl = 0;
  int minibatches = 0;
  nlohmann::json to_json() const;
};

// Clipped-surrogate loss of one minibatch: separate sense and move policy
// losses (each a mean over its own steps), summed, plus value_coef * value
// MSE, minus entropy_coef * the heads' mean entropies. Accumulates the
// gradient into `grads` when given.
double ppo_loss(const nn::PolicyValueNet<float>& net, std::span<const TrajectoryStep* const> batch,
                const PpoConfig& config, std::vector<nn::Tensor<float>>* grads, UpdateStats* stats = nullptr);

// `epochs` passes over shuffled minibatches, one Adam step each.
UpdateStats ppo_update(nn::PolicyValueNet<float>& net, nn::AdamState<float>& optimizer,
                       const std::vector<TrajectoryStep>& steps, const PpoConfig& config, std::mt19937_64& rng);

}  // namespace rbc::rl
