#include "nn/adam.hpp"

#include <cmath>

namespace rbc::nn {

template <typename T>
AdamState<T> AdamState<T>::for_params(const std::vector<Tensor<T>>& params, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const auto& p : params) {
    s.m.emplace_back(p.shape);
    s.v.emplace_back(p.shape);
  }
  return s;
}

template <typename T>
void adam_step(std::vector<Tensor<T>>& params, const std::vector<Tensor<T>>& grads, AdamState<T>& s) {
  if (grads.size() != params.size() || s.m.size() != params.size() || s.v.size() != params.size())
    throw ShapeError("adam: parameter, gradient and moment counts differ");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (grads[i].shape != params[i].shape || s.m[i].shape != params[i].shape || s.v[i].shape != params[i].shape)
      throw ShapeError("adam: shape mismatch for parameter " + std::to_string(i));
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  const T b1 = static_cast<T>(s.beta1), b2 = static_cast<T>(s.beta2);
  const T lr = static_cast<T>(s.learning_rate / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2), eps = static_cast<T>(s.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    T* p = params[i].data();
    const T* g = grads[i].data();
    T* m = s.m[i].data();
    T* v = s.v[i].data();
    for (std::size_t j = 0, n = params[i].size(); j < n; ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      p[j] -= lr * m[j] / (std::sqrt(v[j] * inv_c2) + eps);
    }
  }
}

template <typename T>
double clip_grad_norm(std::vector<Tensor<T>>& grads, double max_norm) {
  double sq = 0;
  for (const auto& g : grads)
    for (T v : g.values) sq += static_cast<double>(v) * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const T scale = static_cast<T>(max_norm / norm);
    for (auto& g : grads)
      for (auto& v : g.values) v *= scale;
  }
  return norm;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(std::vector<Tensor<float>>&, const std::vector<Tensor<float>>&, AdamState<float>&);
template void adam_step<double>(std::vector<Tensor<double>>&, const std::vector<Tensor<double>>&, AdamState<double>&);
template double clip_grad_norm<float>(std::vector<Tensor<float>>&, double);
template double clip_grad_norm<double>(std::vector<Tensor<double>>&, double);

}  // namespace rbc::nn
