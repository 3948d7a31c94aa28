#pragma once

#include <deque>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "nn/network.hpp"

namespace rbc::rl {

// p_i = (1 - w_i / sum_j w_j) / (n - 1), i.e. opponents the trainer beats
// least are drawn most. n = 1 gives p = 1; sum w = 0 gives uniform.
// Throws std::invalid_argument on an empty list or w outside [0, 1].
std::vector<double> opponent_probabilities(const std::vector<double>& win_rates);

// Fixed-capacity window of results (win 1, draw 0.5, loss 0).
class ResultWindow {
 public:
  explicit ResultWindow(std::size_t capacity) : capacity_(capacity) {}
  void push(double score);
  void clear() { results_.clear(), sum_ = 0; }
  std::size_t size() const { return results_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Mean of the window; `empty_value` when there are no results.
  double mean(double empty_value = 0.5) const;

 private:
  std::size_t capacity_;
  std::deque<double> results_;
  double sum_ = 0;
};

struct Snapshot {
  std::string id;
  std::shared_ptr<const nn::PolicyValueNet<float>> net;
  ResultWindow results;
};

struct PoolConfig {
  std::size_t capacity = 500;       // K: results kept per snapshot and in the aggregate window
  double snapshot_threshold = 0.65;
  std::size_t warmup_games = 100;   // aggregate window size needed before a snapshot
};

class OpponentPool {
 public:
  explicit OpponentPool(PoolConfig config = {}) : config_(config), aggregate_(config.capacity) {}

  void add(std::string id, std::shared_ptr<const nn::PolicyValueNet<float>> net);
  std::size_t size() const { return snapshots_.size(); }
  const Snapshot& at(std::size_t i) const { return snapshots_.at(i); }
  const Snapshot& find(const std::string& id) const;

  std::vector<double> win_rates() const;
  std::vector<double> probabilities() const { return opponent_probabilities(win_rates()); }
  // Throws std::logic_error on an empty pool.
  std::size_t sample_index(std::mt19937_64& rng) const;
  const Snapshot& sample_opponent(std::mt19937_64& rng) const { return snapshots_[sample_index(rng)]; }

  // Appends to that snapshot's window and to the trainer's aggregate
  // window. Throws std::out_of_range for an unknown id.
  void record_result(const std::string& id, double trainer_score);

  double aggregate_win_rate() const { return aggregate_.mean(0.0); }
  std::size_t aggregate_games() const { return aggregate_.size(); }

  // Freezes a copy of `trainer` when the aggregate window holds at least
  // the warm-up count and its mean reaches the threshold; the window then
  // restarts. Returns whether a snapshot was taken.
  bool maybe_snapshot(const nn::PolicyValueNet<float>& trainer, const std::string& id);

 private:
  Snapshot& lookup(const std::string& id);

  PoolConfig config_;
  std::vector<Snapshot> snapshots_;
  ResultWindow aggregate_;
};

}  // namespace rbc::rl
