#pragma once

#include <json.hpp>

#include "encoding/observation.hpp"

namespace rbc::enc {

// Canonical JSON form of an Observation. Piece sets are objects keyed by
// piece letter (P N B R Q K) holding ascending square names.
nlohmann::json to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j);

nlohmann::json squares_json(Bitboard b);
Bitboard squares_from_json(const nlohmann::json& j);

}  // namespace rbc::enc
