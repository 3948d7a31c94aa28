#include "nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rbc::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'R', 'B', 'C', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  template <typename V>
  void pod(V v) {
    out_.append(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void text(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void array(const std::string& name, const Tensor<float>& t) {
    text(name);
    pod(static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) pod(static_cast<std::uint32_t>(d));
    out_.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float));
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t n) : data_(data), end_(n) {}
  template <typename V>
  V pod() {
    V v;
    take(&v, sizeof v);
    return v;
  }
  std::string text() {
    const auto n = pod<std::uint32_t>();
    need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }
  std::pair<std::string, Tensor<float>> array() {
    std::string name = text();
    const auto rank = pod<std::uint32_t>();
    if (rank > 8) throw CheckpointCorrupt("implausible array rank for " + name);
    std::vector<int> shape;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto d = pod<std::uint32_t>();
      if (d == 0 || d > (1u << 24)) throw CheckpointCorrupt("implausible dimension for " + name);
      shape.push_back(static_cast<int>(d));
      count *= d;
    }
    need(count * sizeof(float));
    Tensor<float> t(std::move(shape));
    std::memcpy(t.data(), data_ + pos_, count * sizeof(float));
    pos_ += count * sizeof(float);
    return {std::move(name), std::move(t)};
  }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > end_ - pos_) throw CheckpointCorrupt("checkpoint truncated");
  }
  void take(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, data_ + pos_, n);
    pos_ += n;
  }
  const char* data_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint make_checkpoint(const PolicyValueNet<float>& net, const AdamState<float>* optimizer, nlohmann::json metadata) {
  Checkpoint c;
  c.config = net.config();
  c.names = net.param_names();
  c.params = net.params();
  if (optimizer) c.optimizer = *optimizer;
  c.metadata = std::move(metadata);
  return c;
}

PolicyValueNet<float> network_from(const Checkpoint& ckpt) {
  PolicyValueNet<float> net(ckpt.config);
  if (net.params().size() != ckpt.params.size() || net.param_names() != ckpt.names)
    throw CheckpointCorrupt("checkpoint arrays do not match the network config");
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    if (net.params()[i].shape != ckpt.params[i].shape)
      throw CheckpointCorrupt("shape mismatch for " + ckpt.names[i]);
    net.params()[i] = ckpt.params[i];
  }
  return net;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes().append(kMagic, sizeof kMagic);
  w.pod(ckpt.version);
  w.text(ckpt.config.to_text());
  w.text(ckpt.metadata.dump());
  w.pod(static_cast<std::uint32_t>(ckpt.params.size()));
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) w.array(ckpt.names.at(i), ckpt.params[i]);
  w.pod(static_cast<std::uint8_t>(ckpt.optimizer ? 1 : 0));
  if (const auto& o = ckpt.optimizer) {
    w.pod(o->learning_rate);
    w.pod(o->beta1);
    w.pod(o->beta2);
    w.pod(o->epsilon);
    w.pod(o->step);
    for (std::size_t i = 0; i < o->m.size(); ++i) w.array(ckpt.names.at(i) + ".m", o->m[i]);
    for (std::size_t i = 0; i < o->v.size(); ++i) w.array(ckpt.names.at(i) + ".v", o->v[i]);
  }
  w.pod(fnv1a(w.bytes().data(), w.bytes().size()));
  return std::move(w.bytes());
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  constexpr std::size_t kHeader = sizeof kMagic + sizeof(std::uint32_t);
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw CheckpointCorrupt("not a checkpoint file (bad magic or truncated header)");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + sizeof kMagic, sizeof version);
  if (version != kCheckpointVersion)
    throw CheckpointVersionError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
  if (bytes.size() < kHeader + sizeof(std::uint64_t)) throw CheckpointCorrupt("checkpoint truncated");
  const std::size_t body = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, sizeof stored);
  if (stored != fnv1a(bytes.data(), body)) throw CheckpointCorrupt("checkpoint checksum mismatch (truncated or damaged)");

  Reader r(bytes.data() + kHeader, body - kHeader);
  Checkpoint c;
  c.version = version;
  try {
    c.config = NetworkConfig::from_text(r.text());
    c.metadata = nlohmann::json::parse(r.text());
  } catch (const std::exception& e) {
    throw CheckpointCorrupt(std::string("bad checkpoint header: ") + e.what());
  }
  const auto count = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto [name, t] = r.array();
    c.names.push_back(std::move(name));
    c.params.push_back(std::move(t));
  }
  if (r.pod<std::uint8_t>()) {
    AdamState<float> o;
    o.learning_rate = r.pod<double>();
    o.beta1 = r.pod<double>();
    o.beta2 = r.pod<double>();
    o.epsilon = r.pod<double>();
    o.step = r.pod<std::int64_t>();
    for (std::uint32_t i = 0; i < count; ++i) o.m.push_back(r.array().second);
    for (std::uint32_t i = 0; i < count; ++i) o.v.push_back(r.array().second);
    c.optimizer = std::move(o);
  }
  if (r.remaining() != 0) throw CheckpointCorrupt("trailing bytes in checkpoint");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace rbc::nn
