#include "rl/trainer.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include "nn/checkpoint.hpp"

namespace rbc::rl {

void RlConfig::validate() const {
  ppo.validate();
  if (games_per_iteration < 1) throw std::invalid_argument("games_per_iteration must be positive");
  if (iterations < 1) throw std::invalid_argument("iterations must be positive");
  if (time_budget_seconds < 0) throw std::invalid_argument("time_budget_seconds must be >= 0");
  if (pool.capacity < 1) throw std::invalid_argument("pool capacity must be positive");
  if (!(pool.snapshot_threshold > 0 && pool.snapshot_threshold <= 1))
    throw std::invalid_argument("snapshot_threshold must be in (0, 1]");
}

nlohmann::json to_json(const RlConfig& c) {
  return {{"ppo", to_json(c.ppo)},
          {"pool_capacity", c.pool.capacity},
          {"snapshot_threshold", c.pool.snapshot_threshold},
          {"warmup_games", c.pool.warmup_games},
          {"games_per_iteration", c.games_per_iteration},
          {"iterations", c.iterations},
          {"time_budget_seconds", c.time_budget_seconds},
          {"seed", c.seed},
          {"turn_cap", c.turn_cap},
          {"checkpoint_every", c.checkpoint_every},
          {"record_every", c.record_every},
          {"threads", c.threads}};
}

RlConfig rl_config_from_json(const nlohmann::json& j) {
  RlConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "ppo") c.ppo = ppo_config_from_json(v);
    else if (key == "pool_capacity") c.pool.capacity = v.get<std::size_t>();
    else if (key == "snapshot_threshold") c.pool.snapshot_threshold = v.get<double>();
    else if (key == "warmup_games") c.pool.warmup_games = v.get<std::size_t>();
    else if (key == "games_per_iteration") c.games_per_iteration = v.get<int>();
    else if (key == "iterations") c.iterations = v.get<int>();
    else if (key == "time_budget_seconds") c.time_budget_seconds = v.get<double>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "turn_cap") c.turn_cap = v.get<int>();
    else if (key == "checkpoint_every") c.checkpoint_every = v.get<int>();
    else if (key == "record_every") c.record_every = v.get<int>();
    else if (key == "threads") c.threads = v.get<int>();
    else throw std::invalid_argument("unknown rl config key: " + key);
  }
  c.validate();
  return c;
}

nlohmann::json IterationLog::to_json() const {
  nlohmann::json rates = nlohmann::json::object();
  for (const auto& [id, w] : opponent_win_rates) rates[id] = w;
  return {{"iteration", iteration},
          {"games", games},
          {"trainer_score", trainer_score},
          {"aggregate_win_rate", aggregate_win_rate},
          {"opponent_win_rates", rates},
          {"pool_size", pool_size},
          {"snapshot", snapshot},
          {"update", update.to_json()},
          {"seconds", seconds}};
}

namespace {

template <typename F>
void parallel_for(int n, int threads, F&& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int t = std::min(n, threads > 0 ? threads : static_cast<int>(hw));
  if (t <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int k = 0; k < t; ++k)
    pool.emplace_back([&] {
      for (int i; (i = next++) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

RlResult run_rl(const nn::PolicyValueNet<float>& initial, const RlConfig& config, const std::filesystem::path& run_dir,
                const IterationCallback& on_iteration) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(run_dir / "checkpoints");
  std::filesystem::create_directories(run_dir / "pool");
  {
    std::ofstream cfg(run_dir / "config.json");
    cfg << nlohmann::json{{"rl", to_json(config)}, {"network", initial.config().to_text()}}.dump(2) << '\n';
  }
  std::ofstream metrics(run_dir / "metrics.jsonl", std::ios::trunc);
  std::ofstream records(run_dir / "games.jsonl", std::ios::trunc);

  auto net = std::make_shared<nn::PolicyValueNet<float>>(initial);
  auto optimizer = nn::AdamState<float>::for_params(net->params(), config.ppo.learning_rate);
  OpponentPool pool(config.pool);
  pool.add("sl", std::make_shared<const nn::PolicyValueNet<float>>(initial));
  std::mt19937_64 rng(config.seed);

  auto save = [&](const std::filesystem::path& path, int iteration, long games) {
    nn::save_checkpoint(path, nn::make_checkpoint(*net, &optimizer,
                                                  {{"stage", "rl"},
                                                   {"iteration", iteration},
                                                   {"games_played", games},
                                                   {"snapshot_id", pool.at(pool.size() - 1).id},
                                                   {"pool_size", pool.size()}}));
  };

  RlResult result;
  long games = 0;
  for (int it = 1; it <= config.iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    // The learner fixes opponents, colours and seeds up front, so results do
    // not depend on how workers interleave.
    const int n = config.games_per_iteration;
    std::vector<std::size_t> opponents(static_cast<std::size_t>(n));
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      opponents[static_cast<std::size_t>(i)] = pool.sample_index(rng);
      seeds[static_cast<std::size_t>(i)] = rng();
    }
    std::shared_ptr<const nn::PolicyValueNet<float>> frozen = std::make_shared<const nn::PolicyValueNet<float>>(*net);
    std::vector<Episode> episodes(static_cast<std::size_t>(n));
    parallel_for(n, config.threads, [&](int i) {
      const auto ui = static_cast<std::size_t>(i);
      const Color c = (games + i) % 2 == 0 ? Color::White : Color::Black;
      episodes[ui] = play_episode(frozen, pool.at(opponents[ui]).net, c, seeds[ui], config.turn_cap, config.ppo.temperature);
    });

    IterationLog log;
    log.iteration = it;
    std::vector<TrajectoryStep> batch;
    double score = 0;
    for (int i = 0; i < n; ++i) {
      auto& ep = episodes[static_cast<std::size_t>(i)];
      const auto& opp_id = pool.at(opponents[static_cast<std::size_t>(i)]).id;
      pool.record_result(opp_id, ep.trainer_score);
      score += ep.trainer_score;
      if (pool.maybe_snapshot(*net, "snap-" + std::to_string(pool.size()))) {
        log.snapshot = true;
        const auto& snap = pool.at(pool.size() - 1);
        nn::save_checkpoint(run_dir / "pool" / (snap.id + ".ckpt"),
                            nn::make_checkpoint(*snap.net, nullptr, {{"stage", "rl"}, {"snapshot_id", snap.id}, {"iteration", it}}));
      }
      ++games;
      if (config.record_every > 0 && games % config.record_every == 0) {
        ep.record.id = "rl-" + std::to_string(games);
        ep.record.meta["trainer"] = ep.trainer_color == Color::White ? "white" : "black";
        ep.record.meta["opponent"] = opp_id;
        records << to_json(ep.record).dump() << '\n';
      }
      assign_rewards(ep.steps, ep.trainer_score);
      compute_gae(ep.steps, config.ppo.gamma, config.ppo.lambda);
      for (auto& s : ep.steps) batch.push_back(std::move(s));
    }
    normalize_advantages(batch);
    log.update = ppo_update(*net, optimizer, batch, config.ppo, rng);

    log.games = games;
    log.trainer_score = score / n;
    log.aggregate_win_rate = pool.aggregate_win_rate();
    const auto rates = pool.win_rates();
    for (std::size_t k = 0; k < pool.size(); ++k) log.opponent_win_rates.emplace_back(pool.at(k).id, rates[k]);
    log.pool_size = pool.size();
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    metrics << log.to_json().dump() << '\n' << std::flush;
    if (on_iteration) on_iteration(log);
    result.iterations = it;

    if (config.checkpoint_every > 0 && it % config.checkpoint_every == 0)
      save(run_dir / "checkpoints" / ("iter-" + std::to_string(it) + ".ckpt"), it, games);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (config.time_budget_seconds > 0 && elapsed >= config.time_budget_seconds) break;
  }
  result.games = games;
  result.pool_size = pool.size();
  result.final_checkpoint = run_dir / "final.ckpt";
  save(result.final_checkpoint, result.iterations, games);
  result.net = net;
  return result;
}

double eval_matchup(std::shared_ptr<const nn::PolicyValueNet<float>> a, std::shared_ptr<const nn::PolicyValueNet<float>> b,
                    int games, std::uint64_t seed, int opening_turns, int threads) {
  if (games < 1) throw std::invalid_argument("eval_matchup needs at least one game");
  arena::MatchOptions o;
  o.games = games;
  o.seed = seed;
  o.opening_turns = opening_turns;
  o.threads = threads;
  const auto r = arena::run_games([&](std::uint64_t s) { return std::make_unique<arena::NetAgent>(a, arena::NetPolicy{}, s); },
                                  [&](std::uint64_t s) { return std::make_unique<arena::NetAgent>(b, arena::NetPolicy{}, s); },
                                  o);
  return r.score;
}

}  // namespace rbc::rl
