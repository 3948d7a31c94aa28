#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace rbc::nn {

template <typename T>
struct LossGrad {
  T loss;
  std::vector<T> grad;  // d loss / d input
};

// Numerically stable softmax (max-shifted).
template <typename T>
std::vector<T> softmax(std::span<const T> logits);

// -log softmax(logits)[target]; gradient softmax - one_hot(target).
// Throws std::out_of_range if target >= logits.size().
template <typename T>
LossGrad<T> cross_entropy(std::span<const T> logits, std::size_t target);

// (pred - target)^2 with gradient 2 (pred - target).
template <typename T>
std::pair<T, T> value_loss(T pred, T target);

// Highest logit; ties go to the lowest index.
template <typename T>
std::size_t argmax_action(std::span<const T> logits);

// Draws from softmax(logits / temperature). Throws std::invalid_argument for
// temperature <= 0 or non-finite logits.
template <typename T>
std::size_t sample_action(std::span<const T> logits, double temperature, std::mt19937_64& rng);

// Entropy of softmax(logits) and its gradient with respect to the logits.
template <typename T>
LossGrad<T> entropy(std::span<const T> logits);

}  // namespace rbc::nn
