#pragma once

#include <memory>
#include <random>
#include <vector>

#include "game/agent.hpp"
#include "nn/network.hpp"

namespace rbc::arena {

// Move indices that name an on-board destination for this mover, with
// underpromotions only from its seventh rank. Other indices can never be
// a move and are never chosen.
const std::vector<bool>& decodable_moves(Color mover);

// Indices of moves the player can justify from its own pieces (own-view
// moves, every forward-diagonal pawn step, and pass).
std::vector<bool> own_view_mask(const enc::PlayerView& view);

// Masked log-softmax; entries outside the mask are -inf.
std::vector<float> masked_log_softmax(std::span<const float> logits, const std::vector<bool>* mask);

struct NetPolicy {
  enum class Mode { Argmax, Sample };
  Mode mode = Mode::Argmax;
  double temperature = 1.0;
  // Restrict moves to own_view_mask. Off by default: the network is
  // trained without illegal-move masking.
  bool legality_mask = false;
};

struct Decision {
  enc::PlaneStack input;
  enc::Stage stage;
  Color color;
  int action;
  float log_prob;  // under the temperature-1 masked policy
  float value;
};

class NetAgent : public Agent {
 public:
  NetAgent(std::shared_ptr<const nn::PolicyValueNet<float>> net, NetPolicy policy, std::uint64_t seed,
           std::vector<Decision>* trace = nullptr);

  Square choose_sense(const enc::PlayerView& view) override;
  Move choose_move(const enc::PlayerView& view) override;

 private:
  int pick(std::span<const float> logits, const std::vector<bool>* mask, enc::Stage stage, const enc::PlayerView& view,
           enc::PlaneStack input, float value);

  std::shared_ptr<const nn::PolicyValueNet<float>> net_;
  NetPolicy policy_;
  std::mt19937_64 rng_;
  std::vector<Decision>* trace_;
};

}  // namespace rbc::arena
