#include "nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nn/losses.hpp"

namespace rbc::nn {

template <typename T>
T supervised_loss(const NetOutput<T>& out, const SupervisedTargets& targets, OutputGrads<T>* grads) {
  const int batch = out.batch();
  if (grads) *grads = OutputGrads<T>::zeros(batch);
  T total = 0;
  for (int b = 0; b < batch; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    const auto s = cross_entropy<T>(std::span<const T>(out.sense_logits.row(b).data(), out.sense_logits.cols()),
                                    static_cast<std::size_t>(targets.sense[bi]));
    const auto m = cross_entropy<T>(std::span<const T>(out.move_logits.row(b).data(), out.move_logits.cols()),
                                    static_cast<std::size_t>(targets.move[bi]));
    const auto [v, dv] = value_loss<T>(out.value[bi], static_cast<T>(targets.value[bi]));
    total += s.loss + m.loss + v;
    if (grads) {
      std::copy(s.grad.begin(), s.grad.end(), grads->sense_logits.row(b).data());
      std::copy(m.grad.begin(), m.grad.end(), grads->move_logits.row(b).data());
      grads->value[bi] = dv;
    }
  }
  return total;
}

template float supervised_loss<float>(const NetOutput<float>&, const SupervisedTargets&, OutputGrads<float>*);
template double supervised_loss<double>(const NetOutput<double>&, const SupervisedTargets&, OutputGrads<double>*);

GradcheckReport gradient_check(const GradcheckOptions& options) {
  NetworkConfig config = options.config;
  config.zero_init_final = false;
  config.seed = options.seed;
  PolicyValueNet<double> net(config);
  std::mt19937_64 rng(options.seed);

  // Biases start at zero; give them random values so every term is exercised.
  for (std::size_t i = 0; i < net.params().size(); ++i)
    if (net.params()[i].shape.size() == 1)
      for (auto& v : net.params()[i].values) v = std::normal_distribution<double>(0.0, 0.1)(rng);

  std::vector<enc::PlaneStack> inputs;
  SupervisedTargets targets;
  for (int b = 0; b < options.batch; ++b) {
    std::vector<std::uint32_t> active;
    std::bernoulli_distribution on(0.02);
    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(enc::kStackValues); ++i)
      if (on(rng)) active.push_back(i);
    inputs.push_back(enc::PlaneStack(std::move(active)));
    targets.sense.push_back(std::uniform_int_distribution<int>(0, enc::kSenseIndexCount - 1)(rng));
    targets.move.push_back(std::uniform_int_distribution<int>(0, enc::kMoveIndexCount - 1)(rng));
    targets.value.push_back(std::uniform_int_distribution<int>(-1, 1)(rng));
  }
  // One move target on the pass logit so that path is covered.
  targets.move[0] = enc::kPassIndex;

  ForwardCache<double> cache;
  const auto out = net.forward(inputs, &cache);
  const auto pattern = cache.relu_pattern();
  OutputGrads<double> dout;
  supervised_loss(out, targets, &dout);
  auto grads = net.zero_grads();
  net.backward(cache, dout, grads);

  GradcheckReport report;
  const double h = options.step;
  for (std::size_t p = 0; p < net.params().size(); ++p) {
    auto& values = net.params()[p].values;
    std::vector<std::size_t> coords(values.size());
    for (std::size_t j = 0; j < coords.size(); ++j) coords[j] = j;
    if (options.max_per_param > 0 && coords.size() > static_cast<std::size_t>(options.max_per_param)) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(static_cast<std::size_t>(options.max_per_param));
    }
    double worst = 0;
    for (std::size_t j : coords) {
      const double orig = values[j];
      ForwardCache<double> cp, cm;
      values[j] = orig + h;
      const double lp = supervised_loss<double>(net.forward(inputs, &cp), targets, nullptr);
      values[j] = orig - h;
      const double lm = supervised_loss<double>(net.forward(inputs, &cm), targets, nullptr);
      values[j] = orig;
      if (cp.relu_pattern() != pattern || cm.relu_pattern() != pattern) {
        ++report.skipped_kinks;
        continue;
      }
      const double numeric = (lp - lm) / (2 * h);
      const double analytic = grads[p][j];
      const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      worst = std::max(worst, rel);
      ++report.checked;
    }
    const auto& name = net.param_names()[p];
    report.per_param[name] = worst;
    if (worst >= report.max_rel_error) {
      report.max_rel_error = worst;
      report.worst_param = name;
    }
  }
  return report;
}

}  // namespace rbc::nn
