#pragma once

// Policy-value network over the 1800x8x8 observation stack.
//
//   input   sparse 1x1 conv 1800 -> C, ReLU
//   trunk   `trunk_blocks` residual blocks: ReLU(x + conv3x3(ReLU(conv3x3(x))))
//   sense   1x1 conv -> Hs, ReLU, linear -> 64 logits
//   move    1x1 conv -> Hm, ReLU, 1x1 conv -> 73 planes (4672 logits) plus a
//           linear pass logit over the Hm x 64 features
//   value   1x1 conv -> 1, ReLU, linear -> Hv, ReLU, linear -> 1, tanh
//
// Activations are laid out channel-major over the batch: (C, B * 64).
// Backward is written out per layer; T is float for training and double
// for finite-difference verification.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "encoding/observation.hpp"
#include "nn/tensor.hpp"

namespace rbc::nn {

struct NetworkConfig {
  int trunk_channels = 64;
  int trunk_blocks = 6;
  int sense_head_channels = 2;
  int move_head_channels = 8;
  int value_hidden = 32;
  std::uint64_t seed = 1;
  // Zero the last layer of every residual block and every head, so the
  // fresh network has uniform policies and zero value.
  bool zero_init_final = true;

  static NetworkConfig desk();
  static NetworkConfig tiny();

  void validate() const;
  std::string to_text() const;
  static NetworkConfig from_text(std::string_view text);
  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

template <typename T>
struct NetOutput {
  Mat<T> sense_logits;  // (B, 64)
  Mat<T> move_logits;   // (B, 4673)
  std::vector<T> value; // (B,), each in [-1, 1]
  int batch() const { return static_cast<int>(value.size()); }
};

// Loss gradients with respect to the network outputs.
template <typename T>
struct OutputGrads {
  Mat<T> sense_logits;
  Mat<T> move_logits;
  std::vector<T> value;

  static OutputGrads zeros(int batch);
};

template <typename T>
struct ForwardCache;

template <typename T>
class PolicyValueNet {
 public:
  explicit PolicyValueNet(const NetworkConfig& config);

  const NetworkConfig& config() const { return config_; }
  std::vector<Tensor<T>>& params() { return params_; }
  const std::vector<Tensor<T>>& params() const { return params_; }
  const std::vector<std::string>& param_names() const { return names_; }
  std::vector<Tensor<T>> zero_grads() const;

  // Throws ShapeError if any stack is not 1800x8x8.
  NetOutput<T> forward(std::span<const enc::PlaneStack> batch, ForwardCache<T>* cache = nullptr) const;
  // Accumulates parameter gradients into `grads`.
  void backward(const ForwardCache<T>& cache, const OutputGrads<T>& dout, std::vector<Tensor<T>>& grads) const;

  template <typename U>
  PolicyValueNet<U> cast() const;

 private:
  void add_param(std::string name, std::vector<int> shape, int fan_in, bool zero, std::uint64_t& rng_state);

  NetworkConfig config_;
  std::vector<Tensor<T>> params_;
  std::vector<std::string> names_;
};

template <typename T>
struct ForwardCache {
  std::vector<std::vector<std::uint32_t>> inputs;  // active positions per sample
  int batch = 0;
  Mat<T> x0;                            // input conv output, post-ReLU
  std::vector<Mat<T>> col1, a1, col2, y;  // per residual block
  Mat<T> sense_h, sense_flat;
  Mat<T> move_h;
  Mat<T> value_h, value_flat, value_hidden;
  std::vector<T> value_out;

  // ReLU on/off pattern; finite-difference checks skip coordinates whose
  // perturbation flips any unit.
  std::vector<bool> relu_pattern() const;
};

template <typename T>
template <typename U>
PolicyValueNet<U> PolicyValueNet<T>::cast() const {
  PolicyValueNet<U> out(config_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& dst = out.params()[i];
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = static_cast<U>(params_[i][j]);
  }
  return out;
}

extern template class PolicyValueNet<float>;
extern template class PolicyValueNet<double>;

}  // namespace rbc::nn
