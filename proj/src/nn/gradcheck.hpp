#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nn/network.hpp"

namespace rbc::nn {

struct GradcheckOptions {
  NetworkConfig config = NetworkConfig::tiny();
  int batch = 2;
  double step = 1e-4;
  // Coordinates checked per parameter array; 0 checks all of them.
  int max_per_param = 0;
  std::uint64_t seed = 7;
};

struct GradcheckReport {
  double max_rel_error = 0;
  std::string worst_param;
  long checked = 0;
  long skipped_kinks = 0;  // perturbation flipped a ReLU
  std::map<std::string, double> per_param;
};

// Summed sense CE + move CE + value squared error over a batch, with its
// output gradients. Targets are per sample.
struct SupervisedTargets {
  std::vector<int> sense, move;
  std::vector<double> value;
};

template <typename T>
T supervised_loss(const NetOutput<T>& out, const SupervisedTargets& targets, OutputGrads<T>* grads);

// Central finite differences against backward() in 64-bit on a randomly
// initialised net (final layers not zeroed) and random sparse inputs.
GradcheckReport gradient_check(const GradcheckOptions& options);

}  // namespace rbc::nn
