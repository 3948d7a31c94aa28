#include "sl/synthetic.hpp"

#include <fstream>

namespace rbc::sl {

void gen_synthetic(const SyntheticOptions& options, std::ostream& out) {
  if (options.games < 0) throw std::invalid_argument("games must be >= 0");
  arena::BotFactory factory;
  for (int i = 0; i < options.games; ++i) {
    const bool a_white = i % 2 == 0;
    const auto seed_a = arena::game_seed(options.seed, i, 0), seed_b = arena::game_seed(options.seed, i, 1);
    auto pa = factory.make(options.a, seed_a);
    auto pb = factory.make(options.b, seed_b);
    GameOptions go;
    go.id = "syn-" + std::to_string(options.seed) + "-" + std::to_string(i);
    go.turn_cap = options.turn_cap;
    auto played = a_white ? play_game(*pa, *pb, go) : play_game(*pb, *pa, go);
    auto& meta = played.record.meta;
    meta["white_bot"] = (a_white ? options.a : options.b).str();
    meta["black_bot"] = (a_white ? options.b : options.a).str();
    meta["white_seed"] = a_white ? seed_a : seed_b;
    meta["black_seed"] = a_white ? seed_b : seed_a;
    out << to_json(played.record).dump() << '\n';
  }
}

void gen_synthetic(const SyntheticOptions& options, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  gen_synthetic(options, out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace rbc::sl
