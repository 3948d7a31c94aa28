#pragma once

#include <cstdint>
#include <vector>

#include "nn/tensor.hpp"

namespace rbc::nn {

template <typename T>
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Tensor<T>> m, v;

  static AdamState for_params(const std::vector<Tensor<T>>& params, double learning_rate = 1e-3);
};

// One bias-corrected Adam update. Throws ShapeError if the parameter,
// gradient and moment shapes differ.
template <typename T>
void adam_step(std::vector<Tensor<T>>& params, const std::vector<Tensor<T>>& grads, AdamState<T>& state);

// Scales all gradients so their global L2 norm is at most max_norm; returns the
// norm before clipping.
template <typename T>
double clip_grad_norm(std::vector<Tensor<T>>& grads, double max_norm);

}  // namespace rbc::nn
