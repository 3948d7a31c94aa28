#pragma once

// Binary checkpoint:
//   "RBCCKPT\0" | u32 version | u32 n + config text | u32 n + metadata JSON
//   | u32 count | per array: u32 name length, name, u32 rank, u32 dims..., f32 LE values
//   | u8 has_optimizer [| f64 lr, b1, b2, eps | i64 step | m arrays | v arrays]
//   | u64 FNV-1a of all preceding bytes

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nn/adam.hpp"
#include "nn/network.hpp"

namespace rbc::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointCorrupt : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  NetworkConfig config;
  std::vector<std::string> names;
  std::vector<Tensor<float>> params;
  std::optional<AdamState<float>> optimizer;
  nlohmann::json metadata = nlohmann::json::object();  // games_played, snapshot_id, stage, ...
};

Checkpoint make_checkpoint(const PolicyValueNet<float>& net, const AdamState<float>* optimizer = nullptr,
                           nlohmann::json metadata = nlohmann::json::object());
// Throws CheckpointCorrupt if names or shapes do not match the config.
PolicyValueNet<float> network_from(const Checkpoint& ckpt);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws std::runtime_error if unreadable, CheckpointCorrupt on a damaged
// file and CheckpointVersionError on an unknown format version.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& bytes);

}  // namespace rbc::nn
