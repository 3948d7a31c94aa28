#include "arena/match.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <atomic>
#include <mutex>
#include <thread>

#include "arena/bots.hpp"
#include "nn/checkpoint.hpp"

namespace rbc::arena {

BotSpec BotSpec::parse(const std::string& text) {
  BotSpec s;
  if (text == "random") return s;
  if (text == "greedy") {
    s.kind = Kind::Greedy;
    return s;
  }
  if (text.rfind("net:", 0) != 0) throw std::invalid_argument("unknown bot '" + text + "' (random, greedy, net:<path>)");
  s.kind = Kind::Net;
  std::string rest = text.substr(4);
  const auto at = rest.rfind('@');
  std::string opts;
  if (at != std::string::npos) {
    opts = rest.substr(at + 1);
    rest.resize(at);
  }
  if (rest.empty()) throw std::invalid_argument("net bot needs a checkpoint path");
  s.checkpoint = rest;
  std::istringstream in(opts);
  std::string opt;
  while (std::getline(in, opt, ',')) {
    if (opt.empty()) continue;
    if (opt == "argmax") {
      s.policy.mode = NetPolicy::Mode::Argmax;
    } else if (opt == "mask") {
      s.policy.legality_mask = true;
    } else if (opt == "sample" || opt.rfind("sample=", 0) == 0) {
      s.policy.mode = NetPolicy::Mode::Sample;
      if (opt.size() > 7) {
        try {
          s.policy.temperature = std::stod(opt.substr(7));
        } catch (const std::exception&) {
          throw std::invalid_argument("bad temperature in '" + opt + "'");
        }
      }
      if (!(s.policy.temperature > 0)) throw std::invalid_argument("temperature must be positive");
    } else {
      throw std::invalid_argument("unknown net bot option '" + opt + "'");
    }
  }
  return s;
}

std::string BotSpec::str() const {
  switch (kind) {
    case Kind::Random: return "random";
    case Kind::Greedy: return "greedy";
    case Kind::Net: break;
  }
  std::ostringstream out;
  out << "net:" << checkpoint << '@';
  if (policy.mode == NetPolicy::Mode::Argmax) out << "argmax";
  else out << "sample=" << policy.temperature;
  if (policy.legality_mask) out << ",mask";
  return out.str();
}

std::shared_ptr<const nn::PolicyValueNet<float>> BotFactory::network(const std::string& checkpoint) {
  auto& slot = nets_[checkpoint];
  if (!slot) slot = std::make_shared<const nn::PolicyValueNet<float>>(nn::network_from(nn::load_checkpoint(checkpoint)));
  return slot;
}

std::unique_ptr<Agent> BotFactory::make(const BotSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case BotSpec::Kind::Random: return std::make_unique<RandomBot>(seed);
    case BotSpec::Kind::Greedy: return std::make_unique<GreedyBot>(seed);
    case BotSpec::Kind::Net: {
      const auto it = nets_.find(spec.checkpoint);
      return std::make_unique<NetAgent>(it != nets_.end() ? it->second : network(spec.checkpoint), spec.policy, seed);
    }
  }
  throw std::logic_error("unhandled bot kind");
}

RandomOpening::RandomOpening(std::unique_ptr<Agent> inner, int turns, std::uint64_t seed)
    : inner_(std::move(inner)), opening_(std::make_unique<RandomBot>(seed)), turns_(turns) {}

Square RandomOpening::choose_sense(const enc::PlayerView& view) {
  return view.turn() <= turns_ ? opening_->choose_sense(view) : inner_->choose_sense(view);
}

Move RandomOpening::choose_move(const enc::PlayerView& view) {
  return view.turn() <= turns_ ? opening_->choose_move(view) : inner_->choose_move(view);
}

void RandomOpening::game_over(const enc::PlayerView& view, const GameResult& result) { inner_->game_over(view, result); }

std::pair<double, double> wilson_interval(double p, int n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = n, z2 = z * z;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double relative_elo(double w) {
  if (!(w > 0 && w < 1)) throw std::invalid_argument("relative_elo needs 0 < w < 1; report the interval endpoints instead");
  return 400.0 * std::log10(w / (1 - w));
}

std::uint64_t game_seed(std::uint64_t match_seed, int game, int stream) {
  // splitmix64 over (seed, game, stream)
  std::uint64_t z = match_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(game) * 4 + static_cast<std::uint64_t>(stream) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

MatchResult run_match(const BotSpec& a, const BotSpec& b, const MatchOptions& options, BotFactory* factory) {
  if (options.games < 2 || options.games % 2 != 0) throw std::invalid_argument("games must be even and at least 2");
  BotFactory local;
  BotFactory& f = factory ? *factory : local;
  // Load networks before any worker starts so that workers only read.
  for (const auto* s : {&a, &b})
    if (s->kind == BotSpec::Kind::Net) f.network(s->checkpoint);
  auto result = run_games([&](std::uint64_t seed) { return f.make(a, seed); },
                          [&](std::uint64_t seed) { return f.make(b, seed); }, options);
  result.a = a.str();
  result.b = b.str();
  return result;
}

MatchResult run_games(const AgentMaker& make_a, const AgentMaker& make_b, const MatchOptions& options) {
  if (options.games < 1) throw std::invalid_argument("games must be at least 1");
  std::vector<GameSummary> games(static_cast<std::size_t>(options.games));
  auto play_one = [&](int i) {
    const bool a_white = i % 2 == 0;
    std::unique_ptr<Agent> pa = make_a(game_seed(options.seed, i, 0));
    std::unique_ptr<Agent> pb = make_b(game_seed(options.seed, i, 1));
    if (options.opening_turns > 0) {
      pa = std::make_unique<RandomOpening>(std::move(pa), options.opening_turns, game_seed(options.seed, i, 2));
      pb = std::make_unique<RandomOpening>(std::move(pb), options.opening_turns, game_seed(options.seed, i, 3));
    }
    GameOptions go;
    go.id = "match-" + std::to_string(i);
    go.turn_cap = options.turn_cap;
    const auto played = a_white ? play_game(*pa, *pb, go) : play_game(*pb, *pa, go);
    GameSummary& s = games[static_cast<std::size_t>(i)];
    s.index = i;
    s.a_white = a_white;
    const auto& r = played.record.result;
    s.a_score = !r.winner ? 0.5 : ((*r.winner == Color::White) == a_white ? 1.0 : 0.0);
    s.turns = static_cast<int>(played.record.turns[0].size());
    s.reason = played.record.meta.value("reason", "");
    s.final_fen = played.record.meta.value("final_fen", "");
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int threads = std::min(options.games, options.threads > 0 ? options.threads : static_cast<int>(hw));
  if (threads <= 1) {
    for (int i = 0; i < options.games; ++i) play_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i; (i = next++) < options.games;) {
          try {
            play_one(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  MatchResult m;
  m.games = options.games;
  double total_turns = 0;
  for (const auto& g : games) {
    const int w = g.a_score == 1.0, d = g.a_score == 0.5, l = g.a_score == 0.0;
    m.wins += w, m.draws += d, m.losses += l;
    if (g.a_white) m.white_wins += w, m.white_draws += d, m.white_losses += l;
    else m.black_wins += w, m.black_draws += d, m.black_losses += l;
    total_turns += g.turns;
    m.score += g.a_score;
  }
  m.score /= m.games;
  m.mean_length = total_turns / m.games;
  std::tie(m.wilson_low, m.wilson_high) = wilson_interval(m.score, m.games);
  m.per_game = std::move(games);
  return m;
}

nlohmann::json MatchResult::to_json() const {
  nlohmann::json j = {{"a", a},
                      {"b", b},
                      {"games", games},
                      {"wins", wins},
                      {"draws", draws},
                      {"losses", losses},
                      {"as_white", {{"wins", white_wins}, {"draws", white_draws}, {"losses", white_losses}}},
                      {"as_black", {{"wins", black_wins}, {"draws", black_draws}, {"losses", black_losses}}},
                      {"mean_length", mean_length},
                      {"score", score},
                      {"wilson95", {wilson_low, wilson_high}}};
  if (score > 0 && score < 1) j["relative_elo"] = relative_elo(score);
  else j["relative_elo_interval"] = {relative_elo(std::clamp(wilson_low, 1e-9, 1 - 1e-9)),
                                     relative_elo(std::clamp(wilson_high, 1e-9, 1 - 1e-9))};
  nlohmann::json pg = nlohmann::json::array();
  for (const auto& g : per_game)
    pg.push_back({{"index", g.index}, {"a_white", g.a_white}, {"a_score", g.a_score}, {"turns", g.turns},
                  {"reason", g.reason}, {"final_fen", g.final_fen}});
  j["per_game"] = std::move(pg);
  return j;
}

std::string MatchResult::table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "A: " << a << "\nB: " << b << "\n";
  out << "             W     D     L\n";
  out << "A as white " << std::setw(5) << white_wins << ' ' << std::setw(5) << white_draws << ' ' << std::setw(5)
      << white_losses << "\n";
  out << "A as black " << std::setw(5) << black_wins << ' ' << std::setw(5) << black_draws << ' ' << std::setw(5)
      << black_losses << "\n";
  out << "total      " << std::setw(5) << wins << ' ' << std::setw(5) << draws << ' ' << std::setw(5) << losses << "\n";
  out << "games " << games << "  score " << score << "  95% Wilson [" << wilson_low << ", " << wilson_high << "]\n";
  out << std::setprecision(1) << "mean length " << mean_length << " turns";
  if (score > 0 && score < 1) out << "  relative Elo " << relative_elo(score);
  out << "\n";
  return out.str();
}

}  // namespace rbc::arena
