#include "encoding/observation_json.hpp"

namespace rbc::enc {

using nlohmann::json;

namespace {

constexpr const char* kKindKeys[kPieceKinds] = {"P", "N", "B", "R", "Q", "K"};

json piece_sets_json(const PieceSets& sets) {
  json out = json::object();
  for (int k = 0; k < kPieceKinds; ++k) out[kKindKeys[k]] = squares_json(sets[k]);
  return out;
}

PieceSets piece_sets_from_json(const json& j) {
  PieceSets sets{};
  for (int k = 0; k < kPieceKinds; ++k) sets[k] = squares_from_json(j.at(kKindKeys[k]));
  return sets;
}

json opt_square(const std::optional<Square>& s) { return s ? json(s->name()) : json(nullptr); }

std::optional<Square> opt_square_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Square::parse(j.get<std::string>());
}

}  // namespace

json squares_json(Bitboard b) {
  json out = json::array();
  while (b) out.push_back(pop_lsb(b).name());
  return out;
}

Bitboard squares_from_json(const json& j) {
  Bitboard b = 0;
  for (const auto& s : j) b |= bit(Square::parse(s.get<std::string>()));
  return b;
}

json to_json(const Observation& obs) {
  return json{{"color", std::string(to_string(obs.color))},
              {"opp_capture_square", opt_square(obs.opp_capture_square)},
              {"my_last_move", obs.my_last_move ? json(obs.my_last_move->uci()) : json(nullptr)},
              {"my_capture_square", opt_square(obs.my_capture_square)},
              {"last_was_illegal", obs.last_was_illegal},
              {"own_pieces", piece_sets_json(obs.own_pieces)},
              {"last_sense", opt_square(obs.last_sense)},
              {"sense_window", squares_json(obs.sense_window)},
              {"sense_pieces", piece_sets_json(obs.sense_pieces)}};
}

Observation observation_from_json(const json& j) {
  Observation obs;
  const auto color = j.at("color").get<std::string>();
  if (color != "white" && color != "black") throw MalformedInput("observation color must be white or black");
  obs.color = color == "white" ? Color::White : Color::Black;
  obs.opp_capture_square = opt_square_from(j.at("opp_capture_square"));
  if (!j.at("my_last_move").is_null()) obs.my_last_move = Move::parse_uci(j.at("my_last_move").get<std::string>());
  obs.my_capture_square = opt_square_from(j.at("my_capture_square"));
  obs.last_was_illegal = j.at("last_was_illegal").get<bool>();
  obs.own_pieces = piece_sets_from_json(j.at("own_pieces"));
  obs.last_sense = opt_square_from(j.at("last_sense"));
  obs.sense_window = squares_from_json(j.at("sense_window"));
  obs.sense_pieces = piece_sets_from_json(j.at("sense_pieces"));
  return obs;
}

}  // namespace rbc::enc
