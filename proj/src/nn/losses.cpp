#include "nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbc::nn {

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of an empty vector");
  const T top = *std::max_element(logits.begin(), logits.end());
  std::vector<T> p(logits.size());
  T sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += p[i] = std::exp(logits[i] - top);
  for (auto& v : p) v /= sum;
  return p;
}

template <typename T>
LossGrad<T> cross_entropy(std::span<const T> logits, std::size_t target) {
  if (target >= logits.size()) throw std::out_of_range("cross_entropy target out of range");
  const T top = *std::max_element(logits.begin(), logits.end());
  T sum = 0;
  for (T v : logits) sum += std::exp(v - top);
  const T log_z = top + std::log(sum);
  LossGrad<T> out{log_z - logits[target], softmax(logits)};
  out.grad[target] -= T(1);
  return out;
}

template <typename T>
std::pair<T, T> value_loss(T pred, T target) {
  const T d = pred - target;
  return {d * d, T(2) * d};
}

template <typename T>
std::size_t argmax_action(std::span<const T> logits) {
  if (logits.empty()) throw std::invalid_argument("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

template <typename T>
std::size_t sample_action(std::span<const T> logits, double temperature, std::mt19937_64& rng) {
  if (!(temperature > 0)) throw std::invalid_argument("sampling temperature must be positive");
  if (std::any_of(logits.begin(), logits.end(), [](T v) { return !std::isfinite(v); }))
    throw std::invalid_argument("sampling from non-finite logits");
  std::vector<double> scaled(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = static_cast<double>(logits[i]) / temperature;
  const auto p = softmax<double>(scaled);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  // Rounding left u above the running sum; take the last class with mass.
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0) return i;
  return p.size() - 1;
}

template <typename T>
LossGrad<T> entropy(std::span<const T> logits) {
  const auto p = softmax(logits);
  T h = 0;
  for (T v : p)
    if (v > 0) h -= v * std::log(v);
  // dH/dz_i = -p_i (log p_i + H)
  std::vector<T> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i] > 0 ? -p[i] * (std::log(p[i]) + h) : T(0);
  return {h, std::move(g)};
}

#define RBC_INSTANTIATE(T)                                                                    \
  template std::vector<T> softmax<T>(std::span<const T>);                                     \
  template LossGrad<T> cross_entropy<T>(std::span<const T>, std::size_t);                     \
  template std::pair<T, T> value_loss<T>(T, T);                                               \
  template std::size_t argmax_action<T>(std::span<const T>);                                  \
  template std::size_t sample_action<T>(std::span<const T>, double, std::mt19937_64&);       \
  template LossGrad<T> entropy<T>(std::span<const T>);

RBC_INSTANTIATE(float)
RBC_INSTANTIATE(double)
#undef RBC_INSTANTIATE

}  // namespace rbc::nn
