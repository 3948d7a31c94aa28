#include "arena/net_agent.hpp"

#include <cmath>
#include <limits>

#include "arena/bots.hpp"
#include "nn/losses.hpp"

namespace rbc::arena {

const std::vector<bool>& decodable_moves(Color mover) {
  static const auto masks = [] {
    std::array<std::vector<bool>, 2> m;
    for (Color c : {Color::White, Color::Black}) {
      auto& v = m[static_cast<std::size_t>(index_of(c))];
      v.assign(enc::kMoveIndexCount, false);
      const int seventh = c == Color::White ? 6 : 1;
      for (int i = 0; i < enc::kMoveIndexCount; ++i) {
        const enc::MoveIndex idx{i};
        // Underpromotions only exist from the mover's seventh rank.
        if (!idx.is_pass() && idx.plane() >= enc::kUnderpromotionBase && idx.from().rank() != seventh) continue;
        try {
          enc::decode_move_index(idx, enc::PawnContext{c, 0});
          v[static_cast<std::size_t>(i)] = true;
        } catch (const MalformedInput&) {
        }
      }
    }
    return m;
  }();
  return masks[static_cast<std::size_t>(index_of(mover))];
}

std::vector<bool> own_view_mask(const enc::PlayerView& view) {
  std::vector<bool> mask(enc::kMoveIndexCount, false);
  auto allow = [&](const Move& m) { mask[static_cast<std::size_t>(enc::encode_move_index(m).value)] = true; };
  for (const Move& m : own_view_moves(view)) allow(m);
  const Color us = view.color();
  const int last = us == Color::White ? 7 : 0;
  for (Bitboard pawns = view.own_pieces()[index_of(PieceKind::Pawn)]; pawns;) {
    const Square from = pop_lsb(pawns);
    for (Bitboard to = attack_tables().pawn[index_of(us)][from.index()] & ~view.own_occupancy(); to;) {
      const Square t = pop_lsb(to);
      allow(t.rank() == last ? Move::make(from, t, PieceKind::Queen) : Move::make(from, t));
    }
  }
  allow(Move::pass());
  return mask;
}

std::vector<float> masked_log_softmax(std::span<const float> logits, const std::vector<bool>* mask) {
  constexpr float kNegInf = -std::numeric_limits<float>::infinity();
  float top = kNegInf;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (!mask || (*mask)[i]) top = std::max(top, logits[i]);
  double sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (!mask || (*mask)[i]) sum += std::exp(static_cast<double>(logits[i] - top));
  const float log_z = top + static_cast<float>(std::log(sum));
  std::vector<float> out(logits.size(), kNegInf);
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (!mask || (*mask)[i]) out[i] = logits[i] - log_z;
  return out;
}

NetAgent::NetAgent(std::shared_ptr<const nn::PolicyValueNet<float>> net, NetPolicy policy, std::uint64_t seed,
                   std::vector<Decision>* trace)
    : net_(std::move(net)), policy_(policy), rng_(seed), trace_(trace) {
  if (policy_.mode == NetPolicy::Mode::Sample && !(policy_.temperature > 0))
    throw std::invalid_argument("sampling temperature must be positive");
}

int NetAgent::pick(std::span<const float> logits, const std::vector<bool>* mask, enc::Stage stage,
                   const enc::PlayerView& view, enc::PlaneStack input, float value) {
  const auto logp = masked_log_softmax(logits, mask);
  int action;
  if (policy_.mode == NetPolicy::Mode::Argmax) {
    action = static_cast<int>(nn::argmax_action<float>(logp));
  } else {
    // -inf entries would be rejected by the sampler; a large negative
    // number gives them zero probability after the exp.
    std::vector<float> scaled(logp.size());
    for (std::size_t i = 0; i < logp.size(); ++i) scaled[i] = std::isfinite(logp[i]) ? logp[i] : -1e30f;
    action = static_cast<int>(nn::sample_action<float>(scaled, policy_.temperature, rng_));
  }
  if (trace_)
    trace_->push_back({std::move(input), stage, view.color(), action, logp[static_cast<std::size_t>(action)], value});
  return action;
}

Square NetAgent::choose_sense(const enc::PlayerView& view) {
  auto input = view.stack(enc::Stage::PreSense);
  const auto out = net_->forward(std::span(&input, 1));
  const std::span<const float> logits(out.sense_logits.data(), enc::kSenseIndexCount);
  return Square(pick(logits, nullptr, enc::Stage::PreSense, view, std::move(input), out.value[0]));
}

Move NetAgent::choose_move(const enc::PlayerView& view) {
  auto input = view.stack(enc::Stage::PreMove);
  const auto out = net_->forward(std::span(&input, 1));
  const std::span<const float> logits(out.move_logits.data(), enc::kMoveIndexCount);
  std::vector<bool> mask = decodable_moves(view.color());
  if (policy_.legality_mask) {
    const auto legal = own_view_mask(view);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && legal[i];
  }
  const int idx = pick(logits, &mask, enc::Stage::PreMove, view, std::move(input), out.value[0]);
  return enc::decode_move_index(enc::MoveIndex{idx}, view.pawn_context());
}

}  // namespace rbc::arena
