#pragma once

// The single configuration document shared by every CLI stage. Layers are
// merged onto the defaults in order (file, then flags); keys that are not
// in the defaults are rejected so typos fail loudly.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/match.hpp"
#include "nn/gradcheck.hpp"
#include "nn/network.hpp"
#include "rl/trainer.hpp"
#include "service/service.hpp"
#include "sl/synthetic.hpp"
#include "sl/trainer.hpp"

namespace rbc::app {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A required input file or setting is absent.
class MissingInput : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

nlohmann::json default_config();
// Merges `layers` onto the defaults and checks every typed section.
nlohmann::json resolve_config(const std::vector<nlohmann::json>& layers);
// FNV-1a over the canonical serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

nlohmann::json to_json(const nn::NetworkConfig& c);
nn::NetworkConfig network_config_from_json(const nlohmann::json& j);

// Typed views of a resolved config. The global seed feeds every section.
nn::NetworkConfig network_of(const nlohmann::json& config);
sl::SyntheticOptions synthetic_of(const nlohmann::json& config);
sl::SlConfig sl_of(const nlohmann::json& config);
rl::RlConfig rl_of(const nlohmann::json& config);
arena::MatchOptions match_of(const nlohmann::json& config);
nn::GradcheckOptions gradcheck_of(const nlohmann::json& config);
service::ServiceOptions service_of(const nlohmann::json& config);
int threads_of(const nlohmann::json& config);

}  // namespace rbc::app
