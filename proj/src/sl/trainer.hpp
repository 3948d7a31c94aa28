#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "nn/adam.hpp"
#include "nn/network.hpp"
#include "sl/dataset.hpp"

namespace rbc::sl {

struct SlConfig {
  int epochs = 5;
  int batch = 64;
  double learning_rate = 1e-3;
  double train_fraction = 0.9;
  std::uint64_t seed = 1;
  MoveTarget move_target = MoveTarget::Requested;
  double sense_weight = 1.0;
  double move_weight = 1.0;
  double value_weight = 1.0;
  // Stop once the test loss has risen this many epochs in a row; 0 disables.
  int patience = 2;
  // Global gradient-norm clip; 0 disables.
  double grad_clip = 0.0;

  void validate() const;
};

nlohmann::json to_json(const SlConfig& c);
// Unknown keys are rejected; missing keys keep their defaults.
SlConfig sl_config_from_json(const nlohmann::json& j);

struct EvalMetrics {
  double sense_loss = 0, move_loss = 0, value_loss = 0;
  double sense_accuracy = 0, move_accuracy = 0;
  long sense_examples = 0, move_examples = 0;

  // Weighted sum per turn (one sense and one move example).
  double total(const SlConfig& c) const {
    return c.sense_weight * sense_loss + c.move_weight * move_loss + c.value_weight * value_loss;
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;  // mean per example over the epoch's batches
  EvalMetrics test;
  double seconds = 0;
};

struct Baselines {
  int majority_sense = 0, majority_move = 0;  // most frequent targets on the train set
  double sense_accuracy = 0, move_accuracy = 0;  // of always predicting them on the test set
};

struct SlReport {
  EvalMetrics initial;
  std::vector<EpochRecord> epochs;
  EvalMetrics final_test;
  Baselines baselines;
  bool stopped_early = false;
  double first_batch_loss = 0;  // training loss on the first batch before any update
};

nlohmann::json to_json(const EvalMetrics& m);
nlohmann::json to_json(const SlReport& r);

// Exact-match argmax accuracy (lowest index wins ties) and mean losses.
// Throws std::invalid_argument on an empty set.
EvalMetrics evaluate(const nn::PolicyValueNet<float>& net, const ExampleSet& set, int batch = 256);

Baselines majority_baselines(const ExampleSet& train, const ExampleSet& test);

// Loss of a batch (mean per example) and, if grads is set, its gradient.
double batch_loss(const nn::PolicyValueNet<float>& net, std::span<const TrainExample> batch, const SlConfig& config,
                  std::vector<nn::Tensor<float>>* grads);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Minimises weighted sense CE + move CE + value MSE with Adam, reshuffling
// each epoch from `config.seed`. Deterministic for a fixed seed.
SlReport train(nn::PolicyValueNet<float>& net, nn::AdamState<float>& optimizer, const ExampleSet& train_set,
               const ExampleSet& test_set, const SlConfig& config, const EpochCallback& on_epoch = {});

}  // namespace rbc::sl
