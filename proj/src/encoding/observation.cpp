#include "encoding/observation.hpp"

#include <algorithm>
#include <cassert>

namespace rbc::enc {

namespace {

void set_board(Bitboard b, std::uint32_t base, std::vector<std::uint32_t>& out) {
  while (b) out.push_back(base + static_cast<std::uint32_t>(pop_lsb(b).index()));
}

void set_square(std::optional<Square> sq, std::uint32_t base, std::vector<std::uint32_t>& out) {
  if (sq) out.push_back(base + static_cast<std::uint32_t>(sq->index()));
}

// What of the current frame is known at decision time.
Observation decision_view(const Observation& obs, Stage stage) {
  Observation v;
  v.color = obs.color;
  v.opp_capture_square = obs.opp_capture_square;
  v.own_pieces = obs.own_pieces;
  if (stage == Stage::PreMove) {
    v.last_sense = obs.last_sense;
    v.sense_window = obs.sense_window;
    v.sense_pieces = obs.sense_pieces;
  }
  return v;
}

}  // namespace

PlaneStack::PlaneStack(std::vector<std::uint32_t> active) : active_(std::move(active)) {
  std::sort(active_.begin(), active_.end());
  assert(active_.empty() || active_.back() < static_cast<std::uint32_t>(kStackValues));
}

bool PlaneStack::at(int channel, Square sq) const {
  const auto key = static_cast<std::uint32_t>(channel * 64 + sq.index());
  return std::binary_search(active_.begin(), active_.end(), key);
}

std::vector<float> PlaneStack::dense() const {
  std::vector<float> out(kStackValues, 0.0f);
  for (auto i : active_) out[i] = 1.0f;
  return out;
}

void encode_frame_into(const Observation& obs, std::uint32_t channel_offset, std::vector<std::uint32_t>& out) {
  const std::uint32_t base = channel_offset * 64;
  auto at_plane = [&](int p) { return base + static_cast<std::uint32_t>(p) * 64; };
  set_square(obs.opp_capture_square, at_plane(plane::kOppCapture), out);
  if (obs.my_last_move && !obs.my_last_move->is_pass) {
    const MoveIndex mi = encode_move_index(*obs.my_last_move);
    out.push_back(at_plane(plane::kMoveBase + mi.plane()) + static_cast<std::uint32_t>(mi.from().index()));
  }
  set_square(obs.my_capture_square, at_plane(plane::kMyCapture), out);
  if (obs.last_was_illegal) set_board(~Bitboard{0}, at_plane(plane::kIllegal), out);
  for (int k = 0; k < kPieceKinds; ++k) set_board(obs.own_pieces[k], at_plane(plane::kOwnBase + k), out);
  set_board(obs.sense_window, at_plane(plane::kSenseWindow), out);
  for (int k = 0; k < kPieceKinds; ++k) set_board(obs.sense_pieces[k], at_plane(plane::kSenseBase + k), out);
  if (obs.color == Color::White) set_board(~Bitboard{0}, at_plane(plane::kColor), out);
}

std::vector<float> encode_frame(const Observation& obs) {
  std::vector<std::uint32_t> idx;
  encode_frame_into(obs, 0, idx);
  std::vector<float> out(kPlanesPerFrame * 64, 0.0f);
  for (auto i : idx) out[i] = 1.0f;
  return out;
}

PlaneStack encode_window(std::span<const Observation> completed, const Observation& current, Stage stage) {
  std::vector<std::uint32_t> active;
  active.reserve(2400);
  const std::size_t keep = std::min<std::size_t>(completed.size(), kHistoryFrames - 1);
  const auto first = completed.size() - keep;
  // Completed frames fill the slots just before the newest one.
  std::uint32_t slot = static_cast<std::uint32_t>(kHistoryFrames - 1 - keep);
  for (std::size_t i = first; i < completed.size(); ++i, ++slot) encode_frame_into(completed[i], slot * kPlanesPerFrame, active);
  encode_frame_into(decision_view(current, stage), (kHistoryFrames - 1) * kPlanesPerFrame, active);
  return PlaneStack(std::move(active));
}

ObservationHistory::ObservationHistory(Color color) : color_(color) {}

const std::optional<Observation>& ObservationHistory::slot(int i) const {
  return ring_[static_cast<std::size_t>((head_ + i) % kHistoryFrames)];
}

const Observation& ObservationHistory::current() const {
  const auto& s = slot(kHistoryFrames - 1);
  if (!s) throw OrderError("no turn has started yet");
  return *s;
}

void ObservationHistory::begin_turn(std::optional<Square> opp_capture, const PieceSets& own) {
  if (phase_ != Phase::BetweenTurns) throw OrderError("begin_turn while a turn is in progress");
  Observation obs;
  obs.color = color_;
  obs.opp_capture_square = opp_capture;
  obs.own_pieces = own;
  // The oldest slot is overwritten and becomes the newest.
  ring_[static_cast<std::size_t>(head_)] = obs;
  head_ = (head_ + 1) % kHistoryFrames;
  ++turns_;
  phase_ = Phase::AwaitingSense;
}

void ObservationHistory::record_sense(const SenseOutcome& sense) {
  if (phase_ != Phase::AwaitingSense) throw OrderError("sense result out of order");
  auto& obs = *ring_[static_cast<std::size_t>((head_ + kHistoryFrames - 1) % kHistoryFrames)];
  obs.last_sense = sense.center;
  obs.sense_window = 0;
  obs.sense_pieces = {};
  for (const auto& r : sense.revealed) {
    obs.sense_window |= bit(r.square);
    if (r.piece && r.piece->color != color_) obs.sense_pieces[index_of(r.piece->kind)] |= bit(r.square);
  }
  phase_ = Phase::AwaitingMove;
}

void ObservationHistory::record_move(const MoveOutcome& outcome) {
  if (phase_ != Phase::AwaitingMove) throw OrderError("move result out of order");
  auto& obs = *ring_[static_cast<std::size_t>((head_ + kHistoryFrames - 1) % kHistoryFrames)];
  obs.my_last_move = outcome.taken_move;
  obs.my_capture_square = outcome.capture_square;
  obs.last_was_illegal = outcome.was_illegal;
  phase_ = Phase::BetweenTurns;
}

PlaneStack ObservationHistory::encode(Stage stage) const {
  std::vector<Observation> completed;
  completed.reserve(kHistoryFrames - 1);
  for (int i = 0; i < kHistoryFrames - 1; ++i) {
    if (slot(i)) completed.push_back(*slot(i));
  }
  if (turns_ == 0) {
    Observation empty;
    empty.color = color_;
    return encode_window(completed, empty, stage);
  }
  return encode_window(completed, current(), stage);
}

}  // namespace rbc::enc
