#pragma once

// Per-turn player knowledge and its 90-plane encoding.
//
// Frame layout (planes within one observation):
//   0        square where the opponent captured one of our pieces
//   1..73    our last taken move (one-hot over move plane x from-square)
//   74       square where we captured an opponent piece
//   75       all ones if our last request was illegal
//   76..81   own pieces P, N, B, R, Q, K
//   82       squares revealed by our last sense
//   83..88   opponent pieces seen in that sense, P..K
//   89       all ones when we play white
// A history stacks 20 frames oldest-first into 1800 channels.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "encoding/move_codec.hpp"
#include "engine/bitboard.hpp"
#include "engine/engine.hpp"

namespace rbc::enc {

constexpr int kPlanesPerFrame = 90;
constexpr int kHistoryFrames = 20;
constexpr int kStackChannels = kPlanesPerFrame * kHistoryFrames;  // 1800
constexpr int kStackValues = kStackChannels * 64;

namespace plane {
constexpr int kOppCapture = 0;
constexpr int kMoveBase = 1;
constexpr int kMyCapture = 74;
constexpr int kIllegal = 75;
constexpr int kOwnBase = 76;
constexpr int kSenseWindow = 82;
constexpr int kSenseBase = 83;
constexpr int kColor = 89;
}  // namespace plane

static_assert(1 + kMovePlanes + 1 + 1 + kPieceKinds + 1 + kPieceKinds + 1 == kPlanesPerFrame);

using PieceSets = std::array<Bitboard, kPieceKinds>;

struct Observation {
  Color color = Color::White;
  std::optional<Square> opp_capture_square;
  std::optional<Move> my_last_move;  // taken move; unset for pass, illegal or not yet moved
  std::optional<Square> my_capture_square;
  bool last_was_illegal = false;
  PieceSets own_pieces{};
  std::optional<Square> last_sense;
  Bitboard sense_window = 0;
  PieceSets sense_pieces{};

  friend bool operator==(const Observation&, const Observation&) = default;
};

enum class Stage { PreSense, PreMove };

// The 1800x8x8 binary input, held as the sorted list of set positions
// (channel * 64 + square). Every value outside the list is zero.
class PlaneStack {
 public:
  PlaneStack() = default;
  explicit PlaneStack(std::vector<std::uint32_t> active);

  std::span<const std::uint32_t> active() const { return active_; }
  static constexpr std::array<int, 3> shape() { return {kStackChannels, 8, 8}; }
  bool at(int channel, Square sq) const;
  std::vector<float> dense() const;

  friend bool operator==(const PlaneStack&, const PlaneStack&) = default;

 private:
  std::vector<std::uint32_t> active_;
};

// Sparse encoding of one frame; positions are plane * 64 + square within
// the frame.
void encode_frame_into(const Observation& obs, std::uint32_t channel_offset, std::vector<std::uint32_t>& out);
// Dense 90x64 frame, mostly for inspection and tests.
std::vector<float> encode_frame(const Observation& obs);

class OrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Fixed ring of 20 frames, oldest first; the newest slot is the turn in
// progress. Events must arrive as begin_turn -> record_sense -> record_move.
class ObservationHistory {
 public:
  enum class Phase { BetweenTurns, AwaitingSense, AwaitingMove };

  explicit ObservationHistory(Color color);

  void begin_turn(std::optional<Square> opp_capture, const PieceSets& own);
  void record_sense(const SenseOutcome& sense);
  void record_move(const MoveOutcome& outcome);

  // Stage controls which parts of the current frame are visible: the sense
  // planes only exist pre-move; move planes are never part of the current
  // frame at decision time.
  PlaneStack encode(Stage stage) const;

  Phase phase() const { return phase_; }
  Color color() const { return color_; }
  int turns() const { return turns_; }
  // Slot i, 0 = oldest. Empty optional for unfilled slots.
  const std::optional<Observation>& slot(int i) const;
  const Observation& current() const;

 private:
  Color color_;
  std::array<std::optional<Observation>, kHistoryFrames> ring_{};
  int head_ = 0;  // index of the oldest slot
  int turns_ = 0;
  Phase phase_ = Phase::BetweenTurns;
};

// Encodes a 20-frame window given completed frames (oldest first, at most
// 19 used) plus the current partial frame.
PlaneStack encode_window(std::span<const Observation> completed, const Observation& current, Stage stage);

}  // namespace rbc::enc
