#include "rl/pool.hpp"

#include <numeric>
#include <stdexcept>

namespace rbc::rl {

std::vector<double> opponent_probabilities(const std::vector<double>& w) {
  if (w.empty()) throw std::invalid_argument("opponent pool is empty");
  for (double v : w)
    if (!(v >= 0 && v <= 1)) throw std::invalid_argument("win rates must lie in [0, 1]");
  const std::size_t n = w.size();
  if (n == 1) return {1.0};
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  if (total <= 0) return p;
  for (std::size_t i = 0; i < n; ++i) p[i] = (1.0 - w[i] / total) / static_cast<double>(n - 1);
  return p;
}

void ResultWindow::push(double score) {
  results_.push_back(score);
  sum_ += score;
  if (results_.size() > capacity_) {
    sum_ -= results_.front();
    results_.pop_front();
  }
}

double ResultWindow::mean(double empty_value) const {
  if (results_.empty()) return empty_value;
  // Re-summed rather than using the running total, so the result does not
  // drift with many pushes.
  return std::accumulate(results_.begin(), results_.end(), 0.0) / static_cast<double>(results_.size());
}

void OpponentPool::add(std::string id, std::shared_ptr<const nn::PolicyValueNet<float>> net) {
  for (const auto& s : snapshots_)
    if (s.id == id) throw std::invalid_argument("duplicate snapshot id " + id);
  snapshots_.push_back(Snapshot{std::move(id), std::move(net), ResultWindow(config_.capacity)});
}

Snapshot& OpponentPool::lookup(const std::string& id) {
  for (auto& s : snapshots_)
    if (s.id == id) return s;
  throw std::out_of_range("unknown snapshot id " + id);
}

const Snapshot& OpponentPool::find(const std::string& id) const {
  for (const auto& s : snapshots_)
    if (s.id == id) return s;
  throw std::out_of_range("unknown snapshot id " + id);
}

std::vector<double> OpponentPool::win_rates() const {
  std::vector<double> w;
  for (const auto& s : snapshots_) w.push_back(s.results.mean(0.5));
  return w;
}

std::size_t OpponentPool::sample_index(std::mt19937_64& rng) const {
  if (snapshots_.empty()) throw std::logic_error("cannot sample from an empty pool");
  const auto p = probabilities();
  std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
  return pick(rng);
}

void OpponentPool::record_result(const std::string& id, double trainer_score) {
  lookup(id).results.push(trainer_score);
  aggregate_.push(trainer_score);
}

bool OpponentPool::maybe_snapshot(const nn::PolicyValueNet<float>& trainer, const std::string& id) {
  if (aggregate_.size() < config_.warmup_games || aggregate_.mean(0.0) < config_.snapshot_threshold) return false;
  add(id, std::make_shared<const nn::PolicyValueNet<float>>(trainer));
  aggregate_.clear();
  return true;
}

}  // namespace rbc::rl
