#include "nn/network.hpp"

#include <array>
#include <random>
#include <sstream>

namespace rbc::nn {

namespace {

constexpr int kIn = enc::kStackChannels;
constexpr int kPlanes = enc::kMovePlanes;

// neighbour[k][sq] for the 3x3 kernel offset k = (dr + 1) * 3 + (df + 1).
const std::array<std::array<int, 64>, 9>& neighbours() {
  static const auto table = [] {
    std::array<std::array<int, 64>, 9> t{};
    for (int k = 0; k < 9; ++k) {
      const int dr = k / 3 - 1, df = k % 3 - 1;
      for (int sq = 0; sq < 64; ++sq) {
        const int r = sq / 8 + dr, f = sq % 8 + df;
        t[k][sq] = (r < 0 || r > 7 || f < 0 || f > 7) ? -1 : r * 8 + f;
      }
    }
    return t;
  }();
  return table;
}

template <typename T>
void im2col(const Mat<T>& x, int batch, Mat<T>& col) {
  const auto channels = x.rows();
  const auto n = x.cols();
  col.setZero(channels * 9, n);
  const auto& nb = neighbours();
  for (Eigen::Index c = 0; c < channels; ++c) {
    const T* src = x.row(c).data();
    for (int k = 0; k < 9; ++k) {
      T* dst = col.row(c * 9 + k).data();
      for (int b = 0; b < batch; ++b) {
        const int base = b * 64;
        for (int sq = 0; sq < 64; ++sq) {
          const int s = nb[k][sq];
          if (s >= 0) dst[base + sq] = src[base + s];
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const Mat<T>& dcol, int batch, Mat<T>& dx) {
  const auto channels = dx.rows();
  const auto& nb = neighbours();
  for (Eigen::Index c = 0; c < channels; ++c) {
    T* dst = dx.row(c).data();
    for (int k = 0; k < 9; ++k) {
      const T* src = dcol.row(c * 9 + k).data();
      for (int b = 0; b < batch; ++b) {
        const int base = b * 64;
        for (int sq = 0; sq < 64; ++sq) {
          const int s = nb[k][sq];
          if (s >= 0) dst[base + s] += src[base + sq];
        }
      }
    }
  }
}

template <typename T>
void relu_inplace(Mat<T>& m) {
  m = m.cwiseMax(T(0));
}

template <typename T>
void relu_mask(Mat<T>& grad, const Mat<T>& activated) {
  grad = (activated.array() > T(0)).select(grad, T(0));
}

// (C, B*64) <-> (B, C*64)
template <typename T>
Mat<T> flatten_per_sample(const Mat<T>& x, int batch) {
  const auto channels = static_cast<int>(x.rows());
  Mat<T> out(batch, channels * 64);
  for (int c = 0; c < channels; ++c)
    for (int b = 0; b < batch; ++b)
      for (int sq = 0; sq < 64; ++sq) out(b, c * 64 + sq) = x(c, b * 64 + sq);
  return out;
}

template <typename T>
Mat<T> unflatten_per_sample(const Mat<T>& flat, int channels) {
  const auto batch = static_cast<int>(flat.rows());
  Mat<T> out(channels, batch * 64);
  for (int c = 0; c < channels; ++c)
    for (int b = 0; b < batch; ++b)
      for (int sq = 0; sq < 64; ++sq) out(c, b * 64 + sq) = flat(b, c * 64 + sq);
  return out;
}

template <typename T>
Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> vec(const Tensor<T>& t) {
  return Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(t.data(), static_cast<Eigen::Index>(t.size()));
}

template <typename T>
Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> vec(Tensor<T>& t) {
  return Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(t.data(), static_cast<Eigen::Index>(t.size()));
}

// Parameter slots, in creation order.
struct Layout {
  int blocks;
  static constexpr int kInW = 0, kInB = 1;
  int block(int i, int which) const { return 2 + i * 4 + which; }  // conv1.w, conv1.b, conv2.w, conv2.b
  int head(int offset) const { return 2 + blocks * 4 + offset; }
  // head offsets
  static constexpr int kSenseConvW = 0, kSenseConvB = 1, kSenseFcW = 2, kSenseFcB = 3;
  static constexpr int kMoveConvW = 4, kMoveConvB = 5, kMovePlanesW = 6, kMovePlanesB = 7, kPassW = 8, kPassB = 9;
  static constexpr int kValueConvW = 10, kValueConvB = 11, kValueFc1W = 12, kValueFc1B = 13, kValueFc2W = 14,
                       kValueFc2B = 15;
};

}  // namespace

NetworkConfig NetworkConfig::desk() {
  NetworkConfig c;
  c.trunk_channels = 32;
  c.trunk_blocks = 3;
  return c;
}

NetworkConfig NetworkConfig::tiny() {
  NetworkConfig c;
  c.trunk_channels = 4;
  c.trunk_blocks = 1;
  c.sense_head_channels = 2;
  c.move_head_channels = 2;
  c.value_hidden = 4;
  return c;
}

void NetworkConfig::validate() const {
  if (trunk_channels <= 0 || trunk_blocks <= 0 || sense_head_channels <= 0 || move_head_channels <= 0 ||
      value_hidden <= 0)
    throw std::invalid_argument("network config values must all be positive");
}

std::string NetworkConfig::to_text() const {
  std::ostringstream out;
  out << "input_channels=" << kIn << '\n'
      << "trunk_channels=" << trunk_channels << '\n'
      << "trunk_blocks=" << trunk_blocks << '\n'
      << "sense_head_channels=" << sense_head_channels << '\n'
      << "move_head_channels=" << move_head_channels << '\n'
      << "value_hidden=" << value_hidden << '\n'
      << "seed=" << seed << '\n'
      << "zero_init_final=" << (zero_init_final ? 1 : 0) << '\n';
  return out.str();
}

NetworkConfig NetworkConfig::from_text(std::string_view text) {
  NetworkConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad config line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "input_channels") {
        if (std::stoi(value) != kIn) throw std::invalid_argument("input_channels must be 1800");
      } else if (key == "trunk_channels") {
        c.trunk_channels = std::stoi(value);
      } else if (key == "trunk_blocks") {
        c.trunk_blocks = std::stoi(value);
      } else if (key == "sense_head_channels") {
        c.sense_head_channels = std::stoi(value);
      } else if (key == "move_head_channels") {
        c.move_head_channels = std::stoi(value);
      } else if (key == "value_hidden") {
        c.value_hidden = std::stoi(value);
      } else if (key == "seed") {
        c.seed = std::stoull(value);
      } else if (key == "zero_init_final") {
        c.zero_init_final = value == "1";
      } else {
        throw std::invalid_argument("unknown network config key: " + key);
      }
    } catch (const std::logic_error& e) {
      throw std::invalid_argument("bad network config value for " + key + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

template <typename T>
OutputGrads<T> OutputGrads<T>::zeros(int batch) {
  OutputGrads g;
  g.sense_logits = Mat<T>::Zero(batch, enc::kSenseIndexCount);
  g.move_logits = Mat<T>::Zero(batch, enc::kMoveIndexCount);
  g.value.assign(static_cast<std::size_t>(batch), T(0));
  return g;
}

template <typename T>
std::vector<bool> ForwardCache<T>::relu_pattern() const {
  std::vector<bool> out;
  auto append = [&](const Mat<T>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i] > T(0));
  };
  append(x0);
  for (const auto& m : a1) append(m);
  for (const auto& m : y) append(m);
  append(sense_h);
  append(move_h);
  append(value_h);
  append(value_hidden);
  return out;
}

template <typename T>
void PolicyValueNet<T>::add_param(std::string name, std::vector<int> shape, int fan_in, bool zero,
                                  std::uint64_t& rng_state) {
  Tensor<T> t(std::move(shape));
  if (!zero && fan_in > 0) {
    std::mt19937_64 rng(rng_state++);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    for (auto& v : t.values) v = static_cast<T>(normal(rng));
  }
  params_.push_back(std::move(t));
  names_.push_back(std::move(name));
}

template <typename T>
PolicyValueNet<T>::PolicyValueNet(const NetworkConfig& config) : config_(config) {
  config_.validate();
  const int c = config.trunk_channels, hs = config.sense_head_channels, hm = config.move_head_channels,
            hv = config.value_hidden;
  const bool zf = config.zero_init_final;
  std::uint64_t rng = config.seed * 0x9E3779B97F4A7C15ull + 1;
  // Each input position holds at most a handful of active channels, so the
  // fan-in used for scaling is the typical active count rather than 1800.
  add_param("input.weight", {kIn, c}, 100, false, rng);
  add_param("input.bias", {c}, 0, true, rng);
  for (int b = 0; b < config.trunk_blocks; ++b) {
    const std::string p = "block" + std::to_string(b);
    add_param(p + ".conv1.weight", {c, c * 9}, c * 9, false, rng);
    add_param(p + ".conv1.bias", {c}, 0, true, rng);
    add_param(p + ".conv2.weight", {c, c * 9}, c * 9, zf, rng);
    add_param(p + ".conv2.bias", {c}, 0, true, rng);
  }
  add_param("sense.conv.weight", {hs, c}, c, false, rng);
  add_param("sense.conv.bias", {hs}, 0, true, rng);
  add_param("sense.fc.weight", {enc::kSenseIndexCount, hs * 64}, hs * 64, zf, rng);
  add_param("sense.fc.bias", {enc::kSenseIndexCount}, 0, true, rng);
  add_param("move.conv.weight", {hm, c}, c, false, rng);
  add_param("move.conv.bias", {hm}, 0, true, rng);
  add_param("move.planes.weight", {kPlanes, hm}, hm, zf, rng);
  add_param("move.planes.bias", {kPlanes}, 0, true, rng);
  add_param("move.pass.weight", {1, hm * 64}, hm * 64, zf, rng);
  add_param("move.pass.bias", {1}, 0, true, rng);
  add_param("value.conv.weight", {1, c}, c, false, rng);
  add_param("value.conv.bias", {1}, 0, true, rng);
  add_param("value.fc1.weight", {hv, 64}, 64, false, rng);
  add_param("value.fc1.bias", {hv}, 0, true, rng);
  add_param("value.fc2.weight", {1, hv}, hv, zf, rng);
  add_param("value.fc2.bias", {1}, 0, true, rng);
}

template <typename T>
std::vector<Tensor<T>> PolicyValueNet<T>::zero_grads() const {
  std::vector<Tensor<T>> g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.shape);
  return g;
}

template <typename T>
NetOutput<T> PolicyValueNet<T>::forward(std::span<const enc::PlaneStack> batch_in, ForwardCache<T>* cache) const {
  const Layout L{config_.trunk_blocks};
  const int batch = static_cast<int>(batch_in.size());
  if (batch == 0) throw ShapeError("empty batch");
  const int n = batch * 64;
  const int c = config_.trunk_channels;
  for (const auto& s : batch_in) {
    if (!s.active().empty() && s.active().back() >= static_cast<std::uint32_t>(enc::kStackValues))
      throw ShapeError("input stack does not have 1800 channels");
  }

  ForwardCache<T> local;
  ForwardCache<T>& fc = cache ? *cache : local;
  fc.batch = batch;
  fc.inputs.clear();
  for (const auto& s : batch_in) fc.inputs.emplace_back(s.active().begin(), s.active().end());

  // Sparse input convolution.
  {
    const auto& w = params_[Layout::kInW];
    Mat<T> xt = Mat<T>::Zero(n, c);
    for (int b = 0; b < batch; ++b) {
      for (std::uint32_t idx : fc.inputs[static_cast<std::size_t>(b)]) {
        const int cin = static_cast<int>(idx / 64), sq = static_cast<int>(idx % 64);
        xt.row(b * 64 + sq) += ConstMatMap<T>(w.data() + static_cast<std::size_t>(cin) * c, 1, c);
      }
    }
    fc.x0 = xt.transpose();
    fc.x0.colwise() += vec(params_[Layout::kInB]);
    relu_inplace(fc.x0);
  }

  fc.col1.resize(static_cast<std::size_t>(config_.trunk_blocks));
  fc.a1.resize(fc.col1.size());
  fc.col2.resize(fc.col1.size());
  fc.y.resize(fc.col1.size());
  const Mat<T>* x = &fc.x0;
  for (int i = 0; i < config_.trunk_blocks; ++i) {
    const auto bi = static_cast<std::size_t>(i);
    im2col(*x, batch, fc.col1[bi]);
    fc.a1[bi].noalias() = params_[L.block(i, 0)].matrix(c) * fc.col1[bi];
    fc.a1[bi].colwise() += vec(params_[L.block(i, 1)]);
    relu_inplace(fc.a1[bi]);
    im2col(fc.a1[bi], batch, fc.col2[bi]);
    fc.y[bi] = *x;
    fc.y[bi].noalias() += params_[L.block(i, 2)].matrix(c) * fc.col2[bi];
    fc.y[bi].colwise() += vec(params_[L.block(i, 3)]);
    relu_inplace(fc.y[bi]);
    x = &fc.y[bi];
  }
  const Mat<T>& trunk = *x;

  NetOutput<T> out;
  // Sense head.
  {
    const int hs = config_.sense_head_channels;
    fc.sense_h.noalias() = params_[L.head(Layout::kSenseConvW)].matrix(hs) * trunk;
    fc.sense_h.colwise() += vec(params_[L.head(Layout::kSenseConvB)]);
    relu_inplace(fc.sense_h);
    fc.sense_flat = flatten_per_sample(fc.sense_h, batch);
    out.sense_logits.noalias() = fc.sense_flat * params_[L.head(Layout::kSenseFcW)].matrix(enc::kSenseIndexCount).transpose();
    out.sense_logits.rowwise() += vec(params_[L.head(Layout::kSenseFcB)]).transpose();
  }
  // Move head.
  {
    const int hm = config_.move_head_channels;
    fc.move_h.noalias() = params_[L.head(Layout::kMoveConvW)].matrix(hm) * trunk;
    fc.move_h.colwise() += vec(params_[L.head(Layout::kMoveConvB)]);
    relu_inplace(fc.move_h);
    Mat<T> planes = params_[L.head(Layout::kMovePlanesW)].matrix(kPlanes) * fc.move_h;
    planes.colwise() += vec(params_[L.head(Layout::kMovePlanesB)]);
    out.move_logits.resize(batch, enc::kMoveIndexCount);
    for (int p = 0; p < kPlanes; ++p)
      for (int b = 0; b < batch; ++b)
        for (int sq = 0; sq < 64; ++sq) out.move_logits(b, p * 64 + sq) = planes(p, b * 64 + sq);
    const auto& wp = params_[L.head(Layout::kPassW)];
    const T bp = params_[L.head(Layout::kPassB)][0];
    for (int b = 0; b < batch; ++b) {
      T acc = bp;
      for (int ch = 0; ch < hm; ++ch)
        for (int sq = 0; sq < 64; ++sq) acc += wp[static_cast<std::size_t>(ch * 64 + sq)] * fc.move_h(ch, b * 64 + sq);
      out.move_logits(b, enc::kPassIndex) = acc;
    }
  }
  // Value head.
  {
    fc.value_h.noalias() = params_[L.head(Layout::kValueConvW)].matrix(1) * trunk;
    fc.value_h.array() += params_[L.head(Layout::kValueConvB)][0];
    relu_inplace(fc.value_h);
    fc.value_flat = flatten_per_sample(fc.value_h, batch);
    fc.value_hidden.noalias() = fc.value_flat * params_[L.head(Layout::kValueFc1W)].matrix(config_.value_hidden).transpose();
    fc.value_hidden.rowwise() += vec(params_[L.head(Layout::kValueFc1B)]).transpose();
    relu_inplace(fc.value_hidden);
    const Mat<T> pre = fc.value_hidden * params_[L.head(Layout::kValueFc2W)].matrix(1).transpose();
    const T b2 = params_[L.head(Layout::kValueFc2B)][0];
    out.value.resize(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) out.value[static_cast<std::size_t>(b)] = std::tanh(pre(b, 0) + b2);
    fc.value_out = out.value;
  }
  return out;
}

template <typename T>
void PolicyValueNet<T>::backward(const ForwardCache<T>& fc, const OutputGrads<T>& dout,
                                 std::vector<Tensor<T>>& grads) const {
  const Layout L{config_.trunk_blocks};
  const int batch = fc.batch;
  const int n = batch * 64;
  const int c = config_.trunk_channels;
  if (dout.sense_logits.rows() != batch || dout.move_logits.rows() != batch ||
      dout.value.size() != static_cast<std::size_t>(batch))
    throw ShapeError("output gradient batch does not match the forward pass");
  const Mat<T>& trunk = config_.trunk_blocks > 0 ? fc.y.back() : fc.x0;
  Mat<T> dtrunk = Mat<T>::Zero(c, n);

  // Value head.
  {
    const int hv = config_.value_hidden;
    Mat<T> dpre(batch, 1);
    for (int b = 0; b < batch; ++b) {
      const T v = fc.value_out[static_cast<std::size_t>(b)];
      dpre(b, 0) = dout.value[static_cast<std::size_t>(b)] * (T(1) - v * v);
    }
    grads[L.head(Layout::kValueFc2W)].matrix(1).noalias() += dpre.transpose() * fc.value_hidden;
    grads[L.head(Layout::kValueFc2B)][0] += dpre.sum();
    Mat<T> dhidden = dpre * params_[L.head(Layout::kValueFc2W)].matrix(1);
    relu_mask(dhidden, fc.value_hidden);
    grads[L.head(Layout::kValueFc1W)].matrix(hv).noalias() += dhidden.transpose() * fc.value_flat;
    vec(grads[L.head(Layout::kValueFc1B)]) += dhidden.colwise().sum().transpose();
    Mat<T> dflat = dhidden * params_[L.head(Layout::kValueFc1W)].matrix(hv);
    Mat<T> dvh = unflatten_per_sample(dflat, 1);
    relu_mask(dvh, fc.value_h);
    grads[L.head(Layout::kValueConvW)].matrix(1).noalias() += dvh * trunk.transpose();
    grads[L.head(Layout::kValueConvB)][0] += dvh.sum();
    dtrunk.noalias() += params_[L.head(Layout::kValueConvW)].matrix(1).transpose() * dvh;
  }
  // Sense head.
  {
    const int hs = config_.sense_head_channels;
    grads[L.head(Layout::kSenseFcW)].matrix(enc::kSenseIndexCount).noalias() += dout.sense_logits.transpose() * fc.sense_flat;
    vec(grads[L.head(Layout::kSenseFcB)]) += dout.sense_logits.colwise().sum().transpose();
    Mat<T> dflat = dout.sense_logits * params_[L.head(Layout::kSenseFcW)].matrix(enc::kSenseIndexCount);
    Mat<T> dh = unflatten_per_sample(dflat, hs);
    relu_mask(dh, fc.sense_h);
    grads[L.head(Layout::kSenseConvW)].matrix(hs).noalias() += dh * trunk.transpose();
    vec(grads[L.head(Layout::kSenseConvB)]) += dh.rowwise().sum();
    dtrunk.noalias() += params_[L.head(Layout::kSenseConvW)].matrix(hs).transpose() * dh;
  }
  // Move head.
  {
    const int hm = config_.move_head_channels;
    Mat<T> dplanes(kPlanes, n);
    for (int p = 0; p < kPlanes; ++p)
      for (int b = 0; b < batch; ++b)
        for (int sq = 0; sq < 64; ++sq) dplanes(p, b * 64 + sq) = dout.move_logits(b, p * 64 + sq);
    grads[L.head(Layout::kMovePlanesW)].matrix(kPlanes).noalias() += dplanes * fc.move_h.transpose();
    vec(grads[L.head(Layout::kMovePlanesB)]) += dplanes.rowwise().sum();
    Mat<T> dh = params_[L.head(Layout::kMovePlanesW)].matrix(kPlanes).transpose() * dplanes;
    const auto& wp = params_[L.head(Layout::kPassW)];
    auto& gwp = grads[L.head(Layout::kPassW)];
    for (int b = 0; b < batch; ++b) {
      const T g = dout.move_logits(b, enc::kPassIndex);
      grads[L.head(Layout::kPassB)][0] += g;
      if (g == T(0)) continue;
      for (int ch = 0; ch < hm; ++ch)
        for (int sq = 0; sq < 64; ++sq) {
          const auto wi = static_cast<std::size_t>(ch * 64 + sq);
          gwp[wi] += g * fc.move_h(ch, b * 64 + sq);
          dh(ch, b * 64 + sq) += g * wp[wi];
        }
    }
    relu_mask(dh, fc.move_h);
    grads[L.head(Layout::kMoveConvW)].matrix(hm).noalias() += dh * trunk.transpose();
    vec(grads[L.head(Layout::kMoveConvB)]) += dh.rowwise().sum();
    dtrunk.noalias() += params_[L.head(Layout::kMoveConvW)].matrix(hm).transpose() * dh;
  }

  // Residual blocks, last to first.
  Mat<T> dx = std::move(dtrunk);
  for (int i = config_.trunk_blocks - 1; i >= 0; --i) {
    const auto bi = static_cast<std::size_t>(i);
    relu_mask(dx, fc.y[bi]);  // dz: gradient at the pre-activation sum
    grads[L.block(i, 2)].matrix(c).noalias() += dx * fc.col2[bi].transpose();
    vec(grads[L.block(i, 3)]) += dx.rowwise().sum();
    Mat<T> dcol = params_[L.block(i, 2)].matrix(c).transpose() * dx;
    Mat<T> da = Mat<T>::Zero(c, n);
    col2im_add(dcol, batch, da);
    relu_mask(da, fc.a1[bi]);
    grads[L.block(i, 0)].matrix(c).noalias() += da * fc.col1[bi].transpose();
    vec(grads[L.block(i, 1)]) += da.rowwise().sum();
    dcol.noalias() = params_[L.block(i, 0)].matrix(c).transpose() * da;
    col2im_add(dcol, batch, dx);  // skip connection keeps dz in dx
  }

  // Input convolution.
  relu_mask(dx, fc.x0);
  vec(grads[Layout::kInB]) += dx.rowwise().sum();
  const Mat<T> dxt = dx.transpose();
  auto& gw = grads[Layout::kInW];
  for (int b = 0; b < batch; ++b) {
    for (std::uint32_t idx : fc.inputs[static_cast<std::size_t>(b)]) {
      const int cin = static_cast<int>(idx / 64), sq = static_cast<int>(idx % 64);
      MatMap<T>(gw.data() + static_cast<std::size_t>(cin) * c, 1, c) += dxt.row(b * 64 + sq);
    }
  }
}

template struct OutputGrads<float>;
template struct OutputGrads<double>;
template struct ForwardCache<float>;
template struct ForwardCache<double>;
template class PolicyValueNet<float>;
template class PolicyValueNet<double>;

}  // namespace rbc::nn
