#include "sl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <random>

#include "nn/losses.hpp"

namespace rbc::sl {

using nn::Mat;
using nn::OutputGrads;
using nn::PolicyValueNet;

void SlConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch < 1) throw std::invalid_argument("batch must be at least 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(train_fraction > 0 && train_fraction < 1)) throw std::invalid_argument("train_fraction must be in (0, 1)");
  if (sense_weight < 0 || move_weight < 0 || value_weight < 0) throw std::invalid_argument("loss weights must be >= 0");
  if (patience < 0) throw std::invalid_argument("patience must be >= 0");
}

nlohmann::json to_json(const SlConfig& c) {
  return {{"epochs", c.epochs},
          {"batch", c.batch},
          {"learning_rate", c.learning_rate},
          {"train_fraction", c.train_fraction},
          {"seed", c.seed},
          {"move_target", c.move_target == MoveTarget::Requested ? "requested" : "taken"},
          {"sense_weight", c.sense_weight},
          {"move_weight", c.move_weight},
          {"value_weight", c.value_weight},
          {"patience", c.patience},
          {"grad_clip", c.grad_clip}};
}

SlConfig sl_config_from_json(const nlohmann::json& j) {
  SlConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "epochs") c.epochs = v.get<int>();
    else if (key == "batch") c.batch = v.get<int>();
    else if (key == "learning_rate") c.learning_rate = v.get<double>();
    else if (key == "train_fraction") c.train_fraction = v.get<double>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "move_target") {
      const auto s = v.get<std::string>();
      if (s != "requested" && s != "taken") throw std::invalid_argument("move_target must be requested or taken");
      c.move_target = s == "requested" ? MoveTarget::Requested : MoveTarget::Taken;
    } else if (key == "sense_weight") c.sense_weight = v.get<double>();
    else if (key == "move_weight") c.move_weight = v.get<double>();
    else if (key == "value_weight") c.value_weight = v.get<double>();
    else if (key == "patience") c.patience = v.get<int>();
    else if (key == "grad_clip") c.grad_clip = v.get<double>();
    else throw std::invalid_argument("unknown sl config key: " + key);
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const EvalMetrics& m) {
  return {{"sense_loss", m.sense_loss},         {"move_loss", m.move_loss},
          {"value_loss", m.value_loss},         {"sense_accuracy", m.sense_accuracy},
          {"move_accuracy", m.move_accuracy},   {"sense_examples", m.sense_examples},
          {"move_examples", m.move_examples}};
}

nlohmann::json to_json(const SlReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"test", to_json(e.test)}, {"seconds", e.seconds}});
  return {{"initial", to_json(r.initial)},
          {"epochs", epochs},
          {"final_test", to_json(r.final_test)},
          {"stopped_early", r.stopped_early},
          {"first_batch_loss", r.first_batch_loss},
          {"baselines",
           {{"majority_sense", r.baselines.majority_sense},
            {"majority_move", r.baselines.majority_move},
            {"sense_accuracy", r.baselines.sense_accuracy},
            {"move_accuracy", r.baselines.move_accuracy}}}};
}

namespace {

std::span<const float> row(const Mat<float>& m, int r) {
  return {m.row(r).data(), static_cast<std::size_t>(m.cols())};
}

std::vector<enc::PlaneStack> inputs_of(std::span<const TrainExample> batch) {
  std::vector<enc::PlaneStack> in;
  in.reserve(batch.size());
  for (const auto& e : batch) in.push_back(e.input);
  return in;
}

std::vector<TrainExample> materialize(const ExampleSet& set, std::span<const std::size_t> idx) {
  std::vector<TrainExample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(set[i]);
  return out;
}

}  // namespace

double batch_loss(const PolicyValueNet<float>& net, std::span<const TrainExample> batch, const SlConfig& config,
                  std::vector<nn::Tensor<float>>* grads) {
  const int n = static_cast<int>(batch.size());
  nn::ForwardCache<float> cache;
  const auto out = net.forward(inputs_of(batch), grads ? &cache : nullptr);
  auto d = OutputGrads<float>::zeros(n);
  const float scale = 1.0f / static_cast<float>(n);
  double total = 0;
  for (int b = 0; b < n; ++b) {
    const auto& e = batch[static_cast<std::size_t>(b)];
    const bool sense = e.kind == ExampleKind::Sense;
    const auto ce = nn::cross_entropy(row(sense ? out.sense_logits : out.move_logits, b), static_cast<std::size_t>(e.target));
    const double w = sense ? config.sense_weight : config.move_weight;
    const auto [vl, dv] = nn::value_loss(out.value[static_cast<std::size_t>(b)], static_cast<float>(e.value_target));
    total += w * ce.loss + config.value_weight * vl;
    if (!grads) continue;
    auto dst = (sense ? d.sense_logits : d.move_logits).row(b);
    for (std::size_t k = 0; k < ce.grad.size(); ++k) dst[static_cast<Eigen::Index>(k)] = static_cast<float>(w) * scale * ce.grad[k];
    d.value[static_cast<std::size_t>(b)] = static_cast<float>(config.value_weight) * scale * dv;
  }
  if (grads) net.backward(cache, d, *grads);
  return total / n;
}

EvalMetrics evaluate(const PolicyValueNet<float>& net, const ExampleSet& set, int batch) {
  if (set.empty()) throw std::invalid_argument("cannot evaluate on an empty example set");
  EvalMetrics m;
  long sense_hits = 0, move_hits = 0;
  double value_sum = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < set.size(); start += static_cast<std::size_t>(batch)) {
    idx.clear();
    for (std::size_t i = start; i < std::min(set.size(), start + static_cast<std::size_t>(batch)); ++i) idx.push_back(i);
    const auto examples = materialize(set, idx);
    const auto out = net.forward(inputs_of(examples));
    for (int b = 0; b < static_cast<int>(examples.size()); ++b) {
      const auto& e = examples[static_cast<std::size_t>(b)];
      const auto target = static_cast<std::size_t>(e.target);
      if (e.kind == ExampleKind::Sense) {
        m.sense_loss += nn::cross_entropy(row(out.sense_logits, b), target).loss;
        sense_hits += nn::argmax_action(row(out.sense_logits, b)) == target;
        ++m.sense_examples;
      } else {
        m.move_loss += nn::cross_entropy(row(out.move_logits, b), target).loss;
        move_hits += nn::argmax_action(row(out.move_logits, b)) == target;
        ++m.move_examples;
      }
      value_sum += nn::value_loss(out.value[static_cast<std::size_t>(b)], static_cast<float>(e.value_target)).first;
    }
  }
  if (m.sense_examples) {
    m.sense_loss /= static_cast<double>(m.sense_examples);
    m.sense_accuracy = static_cast<double>(sense_hits) / static_cast<double>(m.sense_examples);
  }
  if (m.move_examples) {
    m.move_loss /= static_cast<double>(m.move_examples);
    m.move_accuracy = static_cast<double>(move_hits) / static_cast<double>(m.move_examples);
  }
  m.value_loss = value_sum / static_cast<double>(set.size());
  return m;
}

Baselines majority_baselines(const ExampleSet& train_set, const ExampleSet& test_set) {
  auto majority = [](const ExampleSet& s, bool sense) {
    std::map<int, long> counts;
    for (const auto& g : s.games())
      for (auto t : sense ? g.sense_targets : g.move_targets) ++counts[t];
    int best = 0;
    long best_count = -1;
    for (const auto& [k, c] : counts)
      if (c > best_count) best = k, best_count = c;  // ties: lowest index
    return best;
  };
  auto rate = [](const ExampleSet& s, bool sense, int target) {
    long hit = 0, n = 0;
    for (const auto& g : s.games())
      for (auto t : sense ? g.sense_targets : g.move_targets) hit += t == target, ++n;
    return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
  };
  Baselines b;
  b.majority_sense = majority(train_set, true);
  b.majority_move = majority(train_set, false);
  b.sense_accuracy = rate(test_set, true, b.majority_sense);
  b.move_accuracy = rate(test_set, false, b.majority_move);
  return b;
}

SlReport train(PolicyValueNet<float>& net, nn::AdamState<float>& optimizer, const ExampleSet& train_set,
               const ExampleSet& test_set, const SlConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  SlReport report;
  report.initial = evaluate(net, test_set);
  report.baselines = majority_baselines(train_set, test_set);

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  auto grads = net.zero_grads();
  double previous = report.initial.total(config);
  int rising = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    long batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
      const auto end = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      const auto examples = materialize(train_set, std::span(order).subspan(start, end - start));
      for (auto& g : grads) g.zero();
      const double loss = batch_loss(net, examples, config, &grads);
      if (epoch == 1 && batches == 0) report.first_batch_loss = loss;
      if (config.grad_clip > 0) nn::clip_grad_norm(grads, config.grad_clip);
      nn::adam_step(net.params(), grads, optimizer);
      loss_sum += loss;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.test = evaluate(net, test_set);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const double test_loss = rec.test.total(config);
    rising = test_loss > previous ? rising + 1 : 0;
    previous = test_loss;
    if (config.patience > 0 && rising >= config.patience && epoch < config.epochs) {
      report.stopped_early = true;
      break;
    }
  }
  report.final_test = report.epochs.back().test;
  return report;
}

}  // namespace rbc::sl
