#include "app/stages.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "nn/checkpoint.hpp"
#include "sl/dataset.hpp"

namespace rbc::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

fs::path required_file(const json& config, const char* section, const char* key, const std::string& hint) {
  const std::string p = config.at(section).at(key).get<std::string>();
  if (p.empty()) throw MissingInput(std::string(section) + "." + key + " is not set; " + hint);
  if (!fs::exists(p)) throw MissingInput(std::string(section) + "." + key + " = " + p + " does not exist; " + hint);
  return p;
}

json gen_data(const json& config, const fs::path& dir, const LogFn&) {
  const auto options = synthetic_of(config);
  const fs::path out = dir / "games.jsonl";
  sl::gen_synthetic(options, out);
  return {{"games", options.games}, {"path", out.string()}, {"white", options.a.str()}, {"black", options.b.str()}};
}

json validate_data(const json& config, const fs::path& dir, const LogFn&) {
  const fs::path path = required_file(config, "data", "path", "pass --data with a JSON Lines file of game records");
  const auto ingest = sl::ingest(path, config["data"]["turn_cap"].get<int>());
  json rejected = json::array();
  for (std::size_t i = 0; i < ingest.rejected.size() && i < 100; ++i) rejected.push_back(ingest.rejected[i]);
  long turns = 0;
  for (const auto& r : ingest.records) turns += static_cast<long>(r.turns[0].size() + r.turns[1].size());
  json report{{"path", path.string()},
              {"lines", ingest.lines},
              {"valid", ingest.records.size()},
              {"rejected_count", ingest.rejected.size()},
              {"rejected", rejected},
              {"examples", 2 * turns}};
  write_json(dir / "validation.json", report);
  if (!ingest.rejected.empty())
    throw ValidationFailure(std::to_string(ingest.rejected.size()) + " of " + std::to_string(ingest.lines) + " records failed validation; first: " +
                                ingest.rejected.front(),
                            report);
  return report;
}

json train_sl(const json& config, const fs::path& dir, const LogFn& log) {
  const fs::path path = required_file(config, "data", "path", "generate records with gen-data and pass --data");
  const auto c = sl_of(config);
  auto ingest = sl::ingest(path, config["data"]["turn_cap"].get<int>());
  if (ingest.records.empty()) throw ValidationFailure("no valid game records in " + path.string(), {{"rejected", ingest.rejected.size()}});
  auto [train_games, test_games] = sl::split(std::move(ingest.records), c.train_fraction, c.seed);
  if (test_games.empty() || train_games.empty()) throw ConfigError("train_fraction leaves an empty train or test split");
  sl::ExampleSet train_set, test_set;
  for (const auto& g : train_games) train_set.add(g, c.move_target);
  for (const auto& g : test_games) test_set.add(g, c.move_target);
  if (log) log({{"event", "data"}, {"train_examples", train_set.size()}, {"test_examples", test_set.size()}, {"rejected", ingest.rejected.size()}});

  nn::PolicyValueNet<float> net(network_of(config));
  auto opt = nn::AdamState<float>::for_params(net.params(), c.learning_rate);
  std::ofstream metrics(dir / "metrics.jsonl");
  const auto report = sl::train(net, opt, train_set, test_set, c, [&](const sl::EpochRecord& e) {
    json line{{"event", "epoch"}, {"epoch", e.epoch}, {"train_loss", e.train_loss}, {"test", sl::to_json(e.test)}, {"seconds", e.seconds}};
    metrics << line.dump() << '\n' << std::flush;
    if (log) log(line);
  });
  json summary = sl::to_json(report);
  summary["train_examples"] = train_set.size();
  summary["test_examples"] = test_set.size();
  summary["rejected_records"] = ingest.rejected.size();
  const fs::path ckpt = dir / "sl.ckpt";
  nn::save_checkpoint(ckpt, nn::make_checkpoint(net, &opt, {{"stage", "sl"}, {"final_test", summary["final_test"]}}));
  summary["checkpoint"] = ckpt.string();
  write_json(dir / "report.json", summary);
  return summary;
}

json train_rl(const json& config, const fs::path& dir, const LogFn& log) {
  const fs::path sl_path =
      required_file(config, "rl", "sl_checkpoint", "train-rl starts from a supervised checkpoint (train-sl writes sl.ckpt); pass --sl-checkpoint");
  const auto c = rl_of(config);
  nn::PolicyValueNet<float> initial = [&] {
    try {
      return nn::network_from(nn::load_checkpoint(sl_path));
    } catch (const std::exception& e) {
      throw ConfigError("cannot load SL checkpoint " + sl_path.string() + ": " + e.what());
    }
  }();
  const auto result = rl::run_rl(initial, c, dir, [&](const rl::IterationLog& it) {
    if (log) {
      json line = it.to_json();
      line["event"] = "iteration";
      log(line);
    }
  });
  json report{{"iterations", result.iterations},
              {"games", result.games},
              {"pool_size", result.pool_size},
              {"final_checkpoint", result.final_checkpoint.string()},
              {"sl_checkpoint", sl_path.string()}};
  write_json(dir / "report.json", report);
  return report;
}

json arena_stage(const json& config, const fs::path& dir, const LogFn&) {
  const auto options = match_of(config);
  const auto a = arena::BotSpec::parse(config["arena"]["a"].get<std::string>());
  const auto b = arena::BotSpec::parse(config["arena"]["b"].get<std::string>());
  arena::BotFactory factory;
  for (const auto* spec : {&a, &b}) {
    if (spec->kind != arena::BotSpec::Kind::Net) continue;
    if (!fs::exists(spec->checkpoint)) throw MissingInput("checkpoint " + spec->checkpoint + " in bot spec " + spec->str() + " does not exist");
    try {
      factory.network(spec->checkpoint);
    } catch (const std::exception& e) {
      throw ConfigError("cannot load checkpoint " + spec->checkpoint + ": " + e.what());
    }
  }
  const arena::MatchResult r = arena::run_match(a, b, options, &factory);
  json report = r.to_json();
  if (!config["arena"]["per_game"].get<bool>()) report.erase("per_game");
  report["table"] = r.table();
  write_json(dir / "report.json", report);
  return report;
}

json gradcheck_stage(const json& config, const fs::path& dir, const LogFn&) {
  const auto options = gradcheck_of(config);
  const double tolerance = config["gradcheck"]["tolerance"].get<double>();
  const auto r = nn::gradient_check(options);
  json per = json::object();
  for (const auto& [name, err] : r.per_param) per[name] = err;
  json report{{"max_rel_error", r.max_rel_error}, {"worst_param", r.worst_param}, {"checked", r.checked},
              {"skipped_kinks", r.skipped_kinks}, {"tolerance", tolerance},           {"pass", r.max_rel_error < tolerance},
              {"per_param", per}};
  write_json(dir / "gradcheck.json", report);
  if (!(r.max_rel_error < tolerance))
    throw ValidationFailure("max relative gradient error " + std::to_string(r.max_rel_error) + " in " + r.worst_param + " exceeds " + std::to_string(tolerance),
                            report);
  return report;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"gen-data", "validate-data", "train-sl", "train-rl", "arena", "gradcheck", "serve"};
  return names;
}

fs::path output_dir_of(const std::string& stage, const json& config) {
  const auto dir = config.at("output_dir").get<std::string>();
  return dir.empty() ? fs::path("runs") / stage : fs::path(dir);
}

void write_manifest(const fs::path& dir, const std::string& stage, const json& config, const json& extra) {
  json m{{"stage", stage},
         {"config", config},
         {"config_hash", config_hash(config)},
         {"seed", config.at("seed")},
         {"deterministic", config.at("deterministic")},
         {"code_version", RBC_CODE_VERSION},
         {"written", utc_now()}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_json(dir / "manifest.json", m);
}

json run_stage(const std::string& stage, const json& config, const LogFn& log) {
  using Fn = json (*)(const json&, const fs::path&, const LogFn&);
  static const std::map<std::string, Fn> stages{{"gen-data", gen_data},   {"validate-data", validate_data}, {"train-sl", train_sl},
                                                {"train-rl", train_rl},   {"arena", arena_stage},           {"gradcheck", gradcheck_stage}};
  const auto it = stages.find(stage);
  if (it == stages.end()) throw ConfigError("unknown stage: " + stage);
  const fs::path dir = output_dir_of(stage, config);
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  write_manifest(dir, stage, config, {{"status", "running"}});
  auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  try {
    json report = it->second(config, dir, log);
    write_manifest(dir, stage, config, {{"status", "ok"}, {"seconds", seconds()}});
    report["output_dir"] = dir.string();
    return report;
  } catch (const std::exception& e) {
    write_manifest(dir, stage, config, {{"status", "failed"}, {"error", e.what()}, {"seconds", seconds()}});
    throw;
  }
}

}  // namespace rbc::app
