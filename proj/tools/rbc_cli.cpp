// rbc: command-line entry point. Everything goes through the C API.
//
// Exit codes: 0 success, 2 validation failure, 3 configuration or usage
// error (including missing inputs), 4 runtime failure.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbc/rbc.h"

using nlohmann::json;

namespace {

enum Exit { kOk = 0, kValidation = 2, kConfig = 3, kRuntime = 4 };

int exit_code(rbc_status s) {
  switch (s) {
    case RBC_OK: return kOk;
    case RBC_ERR_VALIDATION: return kValidation;
    case RBC_ERR_CONFIG:
    case RBC_ERR_MISSING_INPUT:
    case RBC_ERR_INVALID_ARGUMENT: return kConfig;
    default: return kRuntime;
  }
}

struct Owned {
  char* p = nullptr;
  ~Owned() { rbc_string_free(p); }
};

// Sets a dotted key path in `j`, creating objects on the way.
void set_path(json& j, const std::string& dotted, json value) {
  json* at = &j;
  std::stringstream ss(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) at = &(*at)[parts[i]];
  (*at)[parts.back()] = std::move(value);
}

// Per-subcommand flag values; unset optionals leave the config alone.
struct Flags {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool deterministic = false;
  bool print_config = false;
  bool json_report = false;
  bool quiet = false;
  std::vector<std::pair<std::string, std::function<std::optional<json>()>>> mapped;

  json overrides() const {
    json o = json::object();
    if (seed) o["seed"] = *seed;
    if (out) o["output_dir"] = *out;
    if (threads) o["threads"] = *threads;
    if (deterministic) o["deterministic"] = true;
    for (const auto& [key, get] : mapped)
      if (auto v = get()) set_path(o, key, *v);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set", "expected key.path=value, got " + s);
      const std::string text = s.substr(eq + 1);
      json v = json::parse(text, nullptr, false);
      set_path(o, s.substr(0, eq), v.is_discarded() ? json(text) : v);
    }
    return o;
  }
};

template <typename T>
void map_flag(CLI::App* cmd, Flags& f, const std::string& name, const std::string& key, const std::string& help) {
  auto value = std::make_shared<std::optional<T>>();
  cmd->add_option_function<T>(name, [value](const T& v) { *value = v; }, help);
  f.mapped.emplace_back(key, [value]() -> std::optional<json> {
    if (*value) return json(**value);
    return std::nullopt;
  });
}

void common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config_file, "JSON config file (see docs/config.md)")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.sets, "Override any key: --set sl.epochs=3 (value parsed as JSON, else taken as a string)");
  cmd->add_option("--seed", f.seed, "Global seed");
  cmd->add_option("-o,--out", f.out, "Output directory (default runs/<subcommand>)");
  cmd->add_option("--threads", f.threads, "Worker threads, 0 = all cores");
  cmd->add_flag("--deterministic", f.deterministic, "Single-threaded reductions");
  cmd->add_flag("--print-config", f.print_config, "Print the effective config and exit");
  cmd->add_flag("--json", f.json_report, "Print the JSON report instead of a summary");
  cmd->add_flag("-q,--quiet", f.quiet, "No progress output");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Resolves defaults <- file <- flags through the library.
int effective_config(const Flags& f, std::string& out) {
  std::vector<std::string> layers;
  if (!f.config_file.empty()) layers.push_back(read_file(f.config_file));
  layers.push_back(f.overrides().dump());
  std::vector<const char*> ptrs;
  for (const auto& l : layers) ptrs.push_back(l.c_str());
  Owned resolved;
  const rbc_status s = rbc_config_resolve(ptrs.data(), ptrs.size(), &resolved.p);
  if (s != RBC_OK) {
    std::cerr << "rbc: config error: " << rbc_last_error() << "\n";
    return exit_code(s);
  }
  out = resolved.p;
  return kOk;
}

void log_event(const char* event_json, void*) {
  const json e = json::parse(event_json);
  const std::string kind = e.value("event", "");
  if (kind == "epoch") {
    std::fprintf(stderr, "epoch %d  train loss %.4f  test move acc %.3f  sense acc %.3f  (%.0fs)\n", e["epoch"].get<int>(), e["train_loss"].get<double>(),
                 e["test"]["move_accuracy"].get<double>(), e["test"]["sense_accuracy"].get<double>(), e["seconds"].get<double>());
  } else if (kind == "iteration") {
    std::fprintf(stderr, "iteration %d  games %ld  score %.3f  aggregate %.3f  pool %zu%s\n", e["iteration"].get<int>(), e["games"].get<long>(),
                 e["trainer_score"].get<double>(), e["aggregate_win_rate"].get<double>(), e["pool_size"].get<std::size_t>(),
                 e.value("snapshot", false) ? "  snapshot" : "");
  } else {
    std::fprintf(stderr, "%s\n", event_json);
  }
}

void summarize(const std::string& stage, const json& r) {
  if (stage == "arena") {
    std::cout << r["table"].get<std::string>();
  } else if (stage == "gen-data") {
    std::cout << "wrote " << r["games"] << " games to " << r["path"].get<std::string>() << "\n";
  } else if (stage == "validate-data") {
    std::cout << r["valid"] << " of " << r["lines"] << " records valid (" << r["examples"] << " examples)\n";
    for (const auto& line : r["rejected"]) std::cout << "  " << line.get<std::string>() << "\n";
  } else if (stage == "train-sl") {
    const auto& t = r["final_test"];
    std::cout << "test move accuracy " << t["move_accuracy"] << " (majority " << r["baselines"]["majority_move"] << "), sense accuracy "
              << t["sense_accuracy"] << "\ncheckpoint " << r["checkpoint"].get<std::string>() << "\n";
  } else if (stage == "train-rl") {
    std::cout << r["iterations"] << " iterations, " << r["games"] << " games, pool of " << r["pool_size"] << "\ncheckpoint "
              << r["final_checkpoint"].get<std::string>() << "\n";
  } else if (stage == "gradcheck") {
    std::cout << "max relative error " << r["max_rel_error"] << " (" << r["worst_param"].get<std::string>() << ") over " << r["checked"]
              << " coordinates, tolerance " << r["tolerance"] << ": " << (r["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
  }
  if (r.contains("output_dir")) std::cout << "outputs in " << r["output_dir"].get<std::string>() << "\n";
}

int run_batch(const std::string& stage, const Flags& f) {
  std::string config;
  if (int rc = effective_config(f, config); rc != kOk) return rc;
  if (f.print_config) {
    std::cout << config << "\n";
    return kOk;
  }
  Owned report;
  const rbc_status s = rbc_run_stage(stage.c_str(), config.c_str(), f.quiet ? nullptr : log_event, nullptr, &report.p);
  if (report.p) {
    if (f.json_report) std::cout << report.p << "\n";
    else summarize(stage, json::parse(report.p));
  }
  if (s != RBC_OK) std::cerr << "rbc " << stage << ": " << rbc_status_name(s) << ": " << rbc_last_error() << "\n";
  return exit_code(s);
}

std::atomic<bool> g_stop{false};

int run_serve(const Flags& f) {
  std::string config;
  if (int rc = effective_config(f, config); rc != kOk) return rc;
  if (f.print_config) {
    std::cout << config << "\n";
    return kOk;
  }
  rbc_server* server = nullptr;
  rbc_status s = rbc_server_new(config.c_str(), &server);
  int port = 0;
  if (s == RBC_OK) s = rbc_server_bind(server, &port);
  if (s != RBC_OK) {
    std::cerr << "rbc serve: " << rbc_status_name(s) << ": " << rbc_last_error() << "\n";
    rbc_server_free(server);
    return exit_code(s);
  }
  const json c = json::parse(config);
  std::cerr << "serving on http://" << c["service"]["host"].get<std::string>() << ":" << port << "/api/games\n";
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  std::thread watcher([server] {
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    rbc_server_stop(server);
  });
  s = rbc_server_run(server);
  g_stop = true;
  watcher.join();
  rbc_server_free(server);
  if (s != RBC_OK) std::cerr << "rbc serve: " << rbc_last_error() << "\n";
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconnaissance Blind Chess: data, training, evaluation and game server"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rbc_version()));

  std::map<std::string, Flags> flags;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    common_flags(cmd, flags[name]);
    return cmd;
  };

  auto* gen = sub("gen-data", "Generate synthetic game records from scripted bots");
  map_flag<int>(gen, flags["gen-data"], "--games", "data.games", "Number of games");
  map_flag<std::string>(gen, flags["gen-data"], "--white", "data.white", "First bot spec (colours alternate)");
  map_flag<std::string>(gen, flags["gen-data"], "--black", "data.black", "Second bot spec");
  map_flag<int>(gen, flags["gen-data"], "--turn-cap", "data.turn_cap", "Turns per player before a draw");

  auto* val = sub("validate-data", "Check game records against the schema and the referee");
  map_flag<std::string>(val, flags["validate-data"], "--data", "data.path", "JSON Lines file of game records");

  auto* sl = sub("train-sl", "Supervised training on game records");
  map_flag<std::string>(sl, flags["train-sl"], "--data", "data.path", "JSON Lines file of game records");
  map_flag<int>(sl, flags["train-sl"], "--epochs", "sl.epochs", "Epochs");
  map_flag<int>(sl, flags["train-sl"], "--batch", "sl.batch", "Minibatch size");
  map_flag<double>(sl, flags["train-sl"], "--lr", "sl.learning_rate", "Adam learning rate");

  auto* rl = sub("train-rl", "PPO self-play against a pool of past snapshots, starting from an SL checkpoint");
  map_flag<std::string>(rl, flags["train-rl"], "--sl-checkpoint", "rl.sl_checkpoint", "Supervised checkpoint that seeds the trainer and the pool");
  map_flag<double>(rl, flags["train-rl"], "--budget-seconds", "rl.time_budget_seconds", "Wall-clock budget");
  map_flag<int>(rl, flags["train-rl"], "--iterations", "rl.iterations", "Iteration limit");
  map_flag<int>(rl, flags["train-rl"], "--games-per-iteration", "rl.games_per_iteration", "Episodes per PPO update");

  auto* ar = sub("arena", "Play two agents against each other with alternating colours");
  map_flag<std::string>(ar, flags["arena"], "--a", "arena.a", "Agent A: random, greedy or net:<ckpt>[@argmax|@sample=T][,mask]");
  map_flag<std::string>(ar, flags["arena"], "--b", "arena.b", "Agent B");
  map_flag<int>(ar, flags["arena"], "--games", "arena.games", "Number of games (even)");
  map_flag<int>(ar, flags["arena"], "--opening-turns", "arena.opening_turns", "Random opening turns per side");

  auto* sv = sub("serve", "Run the game server");
  map_flag<std::string>(sv, flags["serve"], "--host", "service.host", "Bind address");
  map_flag<int>(sv, flags["serve"], "--port", "service.port", "Port, 0 = any free port");
  map_flag<std::string>(sv, flags["serve"], "--data-dir", "service.data_dir", "Game storage directory (env RBC_DATA_DIR overrides)");
  map_flag<int>(sv, flags["serve"], "--max-games", "service.max_games", "Concurrent unfinished games");

  auto* gc = sub("gradcheck", "Finite-difference check of the network's backward pass");
  map_flag<std::string>(gc, flags["gradcheck"], "--network", "gradcheck.network", "tiny, desk, or network (the config's network section)");
  map_flag<double>(gc, flags["gradcheck"], "--tolerance", "gradcheck.tolerance", "Maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    for (auto* cmd : app.get_subcommands()) {
      const std::string name = cmd->get_name();
      return name == "serve" ? run_serve(flags[name]) : run_batch(name, flags[name]);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "rbc: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "rbc: " << e.what() << "\n";
    return kRuntime;
  }
  return kConfig;
}
