#include "rl/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "game/runner.hpp"

namespace rbc::rl {

void PpoConfig::validate() const {
  if (!(clip > 0 && clip < 1)) throw std::invalid_argument("clip must be in (0, 1)");
  if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("gamma must be in (0, 1]");
  if (!(lambda > 0 && lambda <= 1)) throw std::invalid_argument("lambda must be in (0, 1]");
  if (epochs < 1 || minibatch < 1) throw std::invalid_argument("epochs and minibatch must be positive");
  if (value_coef < 0 || entropy_coef < 0 || max_grad_norm < 0) throw std::invalid_argument("coefficients must be >= 0");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(temperature > 0)) throw std::invalid_argument("temperature must be positive");
}

nlohmann::json to_json(const PpoConfig& c) {
  return {{"clip", c.clip},           {"gamma", c.gamma},
          {"lambda", c.lambda},       {"epochs", c.epochs},
          {"minibatch", c.minibatch}, {"value_coef", c.value_coef},
          {"entropy_coef", c.entropy_coef}, {"learning_rate", c.learning_rate},
          {"max_grad_norm", c.max_grad_norm}, {"temperature", c.temperature}};
}

PpoConfig ppo_config_from_json(const nlohmann::json& j) {
  PpoConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "clip") c.clip = v.get<double>();
    else if (key == "gamma") c.gamma = v.get<double>();
    else if (key == "lambda") c.lambda = v.get<double>();
    else if (key == "epochs") c.epochs = v.get<int>();
    else if (key == "minibatch") c.minibatch = v.get<int>();
    else if (key == "value_coef") c.value_coef = v.get<double>();
    else if (key == "entropy_coef") c.entropy_coef = v.get<double>();
    else if (key == "learning_rate") c.learning_rate = v.get<double>();
    else if (key == "max_grad_norm") c.max_grad_norm = v.get<double>();
    else if (key == "temperature") c.temperature = v.get<double>();
    else throw std::invalid_argument("unknown ppo config key: " + key);
  }
  c.validate();
  return c;
}

Episode play_episode(std::shared_ptr<const nn::PolicyValueNet<float>> trainer,
                     std::shared_ptr<const nn::PolicyValueNet<float>> opponent, Color trainer_color,
                     std::uint64_t seed, int turn_cap, double temperature) {
  std::vector<arena::Decision> trace;
  arena::NetPolicy sample;
  sample.mode = arena::NetPolicy::Mode::Sample;
  sample.temperature = temperature;
  arena::NetAgent me(std::move(trainer), sample, seed, &trace);
  arena::NetAgent them(std::move(opponent), arena::NetPolicy{}, seed ^ 0x5bd1e995u);
  GameOptions go;
  go.id = "episode-" + std::to_string(seed);
  go.turn_cap = turn_cap;
  auto played = trainer_color == Color::White ? play_game(me, them, go) : play_game(them, me, go);

  Episode ep;
  ep.trainer_color = trainer_color;
  const auto& r = played.record.result;
  ep.trainer_score = !r.winner ? 0.5 : (*r.winner == trainer_color ? 1.0 : 0.0);
  ep.steps.reserve(trace.size());
  for (auto& d : trace) {
    TrajectoryStep s;
    s.input = std::move(d.input);
    s.head = d.stage == enc::Stage::PreSense ? Head::Sense : Head::Move;
    s.color = d.color;
    s.action = d.action;
    s.logprob = d.log_prob;
    s.value_pred = d.value;
    ep.steps.push_back(std::move(s));
  }
  ep.record = std::move(played.record);
  return ep;
}

void assign_rewards(std::vector<TrajectoryStep>& steps, double trainer_score) {
  for (auto& s : steps) s.reward = 0;
  if (trainer_score == 0.5 || steps.size() < 2) return;
  const float r = trainer_score > 0.5 ? 1.0f : -1.0f;
  steps[steps.size() - 1].reward = r;
  steps[steps.size() - 2].reward = r;
}

void compute_gae(std::vector<TrajectoryStep>& steps, double gamma, double lambda) {
  double next_value = 0, next_adv = 0;
  for (std::size_t i = steps.size(); i-- > 0;) {
    auto& s = steps[i];
    const double delta = s.reward + gamma * next_value - s.value_pred;
    const double adv = delta + gamma * lambda * next_adv;
    s.advantage = static_cast<float>(adv);
    s.return_ = static_cast<float>(adv + s.value_pred);
    next_value = s.value_pred;
    next_adv = adv;
  }
}

void normalize_advantages(std::vector<TrajectoryStep>& steps) {
  if (steps.empty()) return;
  double mean = 0;
  for (const auto& s : steps) mean += s.advantage;
  mean /= static_cast<double>(steps.size());
  double var = 0;
  for (const auto& s : steps) var += (s.advantage - mean) * (s.advantage - mean);
  var /= static_cast<double>(steps.size());
  const double sd = std::sqrt(var);
  for (auto& s : steps) s.advantage = static_cast<float>(sd > 1e-8 ? (s.advantage - mean) / sd : s.advantage - mean);
}

nlohmann::json UpdateStats::to_json() const {
  return {{"sense_policy_loss", sense_policy_loss}, {"move_policy_loss", move_policy_loss},
          {"value_loss", value_loss},               {"sense_entropy", sense_entropy},
          {"move_entropy", move_entropy},           {"clip_fraction", clip_fraction},
          {"approx_kl", approx_kl},                 {"minibatches", minibatches}};
}

double ppo_loss(const nn::PolicyValueNet<float>& net, std::span<const TrajectoryStep* const> batch,
                const PpoConfig& config, std::vector<nn::Tensor<float>>* grads, UpdateStats* stats) {
  const int n = static_cast<int>(batch.size());
  if (n == 0) throw std::invalid_argument("empty PPO minibatch");
  std::vector<enc::PlaneStack> inputs;
  inputs.reserve(batch.size());
  int n_sense = 0, n_move = 0;
  for (const auto* s : batch) {
    inputs.push_back(s->input);
    (s->head == Head::Sense ? n_sense : n_move)++;
  }
  nn::ForwardCache<float> cache;
  const auto out = net.forward(inputs, grads ? &cache : nullptr);
  auto d = nn::OutputGrads<float>::zeros(n);

  double sense_pi = 0, move_pi = 0, sense_h = 0, move_h = 0, value = 0, clipped = 0, kl = 0;
  for (int b = 0; b < n; ++b) {
    const auto& s = *batch[static_cast<std::size_t>(b)];
    const bool sense = s.head == Head::Sense;
    const auto& logits_m = sense ? out.sense_logits : out.move_logits;
    const std::span<const float> logits(logits_m.row(b).data(), static_cast<std::size_t>(logits_m.cols()));
    const std::vector<bool>* mask = sense ? nullptr : &arena::decodable_moves(s.color);
    const auto logp = arena::masked_log_softmax(logits, mask);

    const double lp = logp[static_cast<std::size_t>(s.action)];
    const double ratio = std::exp(lp - s.logprob);
    const double adv = s.advantage;
    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, 1 - config.clip, 1 + config.clip) * adv;
    const double head_n = sense ? n_sense : n_move;
    (sense ? sense_pi : move_pi) -= std::min(surr1, surr2) / head_n;
    clipped += surr2 < surr1;
    kl += s.logprob - lp;

    double h = 0;
    for (float v : logp)
      if (std::isfinite(v)) h -= std::exp(static_cast<double>(v)) * v;
    (sense ? sense_h : move_h) += h / head_n;

    const double v = out.value[static_cast<std::size_t>(b)];
    value += (v - s.return_) * (v - s.return_) / n;

    if (!grads) continue;
    // d(-min(surr1, surr2))/d logp is -A r on the unclipped branch, 0 otherwise.
    const double g_logp = surr1 <= surr2 ? -adv * ratio / head_n : 0.0;
    const double g_ent = -config.entropy_coef / head_n;
    auto row = (sense ? d.sense_logits : d.move_logits).row(b);
    for (std::size_t k = 0; k < logp.size(); ++k) {
      if (!std::isfinite(logp[k])) continue;
      const double p = std::exp(static_cast<double>(logp[k]));
      const double dlogp = (k == static_cast<std::size_t>(s.action) ? 1.0 : 0.0) - p;
      const double dh = -p * (logp[k] + h);
      row[static_cast<Eigen::Index>(k)] = static_cast<float>(g_logp * dlogp + g_ent * dh);
    }
    d.value[static_cast<std::size_t>(b)] = static_cast<float>(config.value_coef * 2 * (v - s.return_) / n);
  }
  if (grads) net.backward(cache, d, *grads);
  if (stats) {
    stats->sense_policy_loss += sense_pi;
    stats->move_policy_loss += move_pi;
    stats->value_loss += value;
    stats->sense_entropy += sense_h;
    stats->move_entropy += move_h;
    stats->clip_fraction += clipped / n;
    stats->approx_kl += kl / n;
    stats->minibatches += 1;
  }
  return sense_pi + move_pi + config.value_coef * value - config.entropy_coef * (sense_h + move_h);
}

UpdateStats ppo_update(nn::PolicyValueNet<float>& net, nn::AdamState<float>& optimizer,
                       const std::vector<TrajectoryStep>& steps, const PpoConfig& config, std::mt19937_64& rng) {
  config.validate();
  if (steps.empty()) throw std::invalid_argument("no trajectory steps to learn from");
  optimizer.learning_rate = config.learning_rate;
  UpdateStats stats;
  std::vector<const TrajectoryStep*> order;
  order.reserve(steps.size());
  for (const auto& s : steps) order.push_back(&s);
  auto grads = net.zero_grads();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.minibatch)) {
      const auto len = std::min(order.size() - start, static_cast<std::size_t>(config.minibatch));
      for (auto& g : grads) g.zero();
      const double loss = ppo_loss(net, std::span(order).subspan(start, len), config, &grads, &stats);
      if (!std::isfinite(loss)) throw std::runtime_error("PPO loss is not finite");
      if (config.max_grad_norm > 0) nn::clip_grad_norm(grads, config.max_grad_norm);
      nn::adam_step(net.params(), grads, optimizer);
    }
  }
  const double m = std::max(1, stats.minibatches);
  stats.sense_policy_loss /= m;
  stats.move_policy_loss /= m;
  stats.value_loss /= m;
  stats.sense_entropy /= m;
  stats.move_entropy /= m;
  stats.clip_fraction /= m;
  stats.approx_kl /= m;
  return stats;
}

}  // namespace rbc::rl
