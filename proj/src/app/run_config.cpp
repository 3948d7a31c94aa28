#include "app/run_config.hpp"

#include <cstdio>
#include <cstdlib>

namespace rbc::app {

using nlohmann::json;

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return !(a.is_number_integer() || a.is_number_unsigned()) || b.is_number_integer() || b.is_number_unsigned();
  return a.type() == b.type();
}

void merge_into(json& base, const json& layer, const std::string& where) {
  if (!layer.is_object()) throw ConfigError("config" + (where.empty() ? "" : " section " + where) + " must be a JSON object");
  for (const auto& [key, value] : layer.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key: " + path);
    json& slot = base[key];
    if (slot.is_object()) {
      merge_into(slot, value, path);
    } else {
      if (!same_kind(slot, value))
        throw ConfigError("config key " + path + " expects " + std::string(slot.type_name()) + ", got " + value.type_name());
      slot = value;
    }
  }
}

template <typename F>
auto typed(const char* section, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid ") + section + " config: " + e.what());
  }
}

json without(json j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) j.erase(k);
  return j;
}

}  // namespace

json to_json(const nn::NetworkConfig& c) {
  return {{"trunk_channels", c.trunk_channels},         {"trunk_blocks", c.trunk_blocks},
          {"sense_head_channels", c.sense_head_channels}, {"move_head_channels", c.move_head_channels},
          {"value_hidden", c.value_hidden}};
}

nn::NetworkConfig network_config_from_json(const json& j) {
  nn::NetworkConfig c;
  c.trunk_channels = j.at("trunk_channels").get<int>();
  c.trunk_blocks = j.at("trunk_blocks").get<int>();
  c.sense_head_channels = j.at("sense_head_channels").get<int>();
  c.move_head_channels = j.at("move_head_channels").get<int>();
  c.value_hidden = j.at("value_hidden").get<int>();
  c.validate();
  return c;
}

json default_config() {
  json rl = without(rl::to_json(rl::RlConfig{}), {"seed", "threads"});
  rl["time_budget_seconds"] = 7200.0;
  rl["sl_checkpoint"] = "";
  return {
      {"seed", 1},
      {"output_dir", ""},
      {"deterministic", false},
      {"threads", 0},
      {"network", to_json(nn::NetworkConfig::desk())},
      {"data", {{"path", ""}, {"games", 2000}, {"white", "greedy"}, {"black", "greedy"}, {"turn_cap", kDefaultTurnCap}}},
      {"sl", without(sl::to_json(sl::SlConfig{}), {"seed"})},
      {"rl", rl},
      {"arena", {{"a", "random"}, {"b", "greedy"}, {"games", 100}, {"opening_turns", 0}, {"turn_cap", kDefaultTurnCap}, {"per_game", false}}},
      {"service", {{"host", "127.0.0.1"}, {"port", 8080}, {"data_dir", "rbc-data"}, {"max_games", 64}, {"max_wait_ms", 30000}}},
      {"gradcheck", {{"network", "tiny"}, {"batch", 2}, {"step", 1e-4}, {"max_per_param", 0}, {"tolerance", 1e-4}}},
  };
}

json resolve_config(const std::vector<json>& layers) {
  json config = default_config();
  for (const auto& layer : layers) merge_into(config, layer, "");
  // Every typed view must parse.
  network_of(config);
  synthetic_of(config);
  sl_of(config);
  rl_of(config);
  match_of(config);
  gradcheck_of(config);
  service_of(config);
  if (config["threads"].get<int>() < 0) throw ConfigError("threads must be >= 0");
  return config;
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config.dump()) h = (h ^ ch) * 0x100000001b3ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nn::NetworkConfig network_of(const json& config) {
  return typed("network", [&] {
    auto c = network_config_from_json(config.at("network"));
    c.seed = config.at("seed").get<std::uint64_t>();
    return c;
  });
}

sl::SyntheticOptions synthetic_of(const json& config) {
  return typed("data", [&] {
    const auto& d = config.at("data");
    sl::SyntheticOptions o;
    o.a = arena::BotSpec::parse(d.at("white").get<std::string>());
    o.b = arena::BotSpec::parse(d.at("black").get<std::string>());
    o.games = d.at("games").get<int>();
    o.turn_cap = d.at("turn_cap").get<int>();
    o.seed = config.at("seed").get<std::uint64_t>();
    if (o.games < 1) throw std::invalid_argument("games must be >= 1");
    if (o.turn_cap < 1) throw std::invalid_argument("turn_cap must be >= 1");
    return o;
  });
}

sl::SlConfig sl_of(const json& config) {
  return typed("sl", [&] {
    json j = config.at("sl");
    j["seed"] = config.at("seed");
    return sl::sl_config_from_json(j);
  });
}

int threads_of(const json& config) { return config.at("deterministic").get<bool>() ? 1 : config.at("threads").get<int>(); }

rl::RlConfig rl_of(const json& config) {
  return typed("rl", [&] {
    json j = without(config.at("rl"), {"sl_checkpoint"});
    j["seed"] = config.at("seed");
    j["threads"] = threads_of(config);
    return rl::rl_config_from_json(j);
  });
}

arena::MatchOptions match_of(const json& config) {
  return typed("arena", [&] {
    const auto& a = config.at("arena");
    arena::BotSpec::parse(a.at("a").get<std::string>());
    arena::BotSpec::parse(a.at("b").get<std::string>());
    arena::MatchOptions o;
    o.games = a.at("games").get<int>();
    o.opening_turns = a.at("opening_turns").get<int>();
    o.turn_cap = a.at("turn_cap").get<int>();
    o.seed = config.at("seed").get<std::uint64_t>();
    o.threads = threads_of(config);
    if (o.games < 2 || o.games % 2) throw std::invalid_argument("games must be even and at least 2");
    if (o.opening_turns < 0) throw std::invalid_argument("opening_turns must be >= 0");
    return o;
  });
}

nn::GradcheckOptions gradcheck_of(const json& config) {
  return typed("gradcheck", [&] {
    const auto& g = config.at("gradcheck");
    nn::GradcheckOptions o;
    const auto net = g.at("network").get<std::string>();
    if (net == "tiny") o.config = nn::NetworkConfig::tiny();
    else if (net == "desk") o.config = nn::NetworkConfig::desk();
    else if (net == "network") o.config = network_config_from_json(config.at("network"));
    else throw std::invalid_argument("network must be tiny, desk or network");
    o.batch = g.at("batch").get<int>();
    o.step = g.at("step").get<double>();
    o.max_per_param = g.at("max_per_param").get<int>();
    o.seed = config.at("seed").get<std::uint64_t>();
    if (o.batch < 1 || !(o.step > 0) || o.max_per_param < 0 || !(g.at("tolerance").get<double>() > 0))
      throw std::invalid_argument("batch >= 1, step > 0, max_per_param >= 0 and tolerance > 0 are required");
    return o;
  });
}

service::ServiceOptions service_of(const json& config) {
  return typed("service", [&] {
    const auto& s = config.at("service");
    service::ServiceOptions o;
    o.data_dir = s.at("data_dir").get<std::string>();
    if (const char* env = std::getenv("RBC_DATA_DIR"); env && *env) o.data_dir = env;
    o.max_games = s.at("max_games").get<int>();
    o.max_wait_ms = s.at("max_wait_ms").get<int>();
    const int port = s.at("port").get<int>();
    if (port < 0 || port > 65535) throw std::invalid_argument("port must be in 0..65535");
    if (o.max_games < 1 || o.max_wait_ms < 0) throw std::invalid_argument("max_games >= 1 and max_wait_ms >= 0 are required");
    return o;
  });
}

}  // namespace rbc::app
