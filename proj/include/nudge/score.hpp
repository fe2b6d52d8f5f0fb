#pragma once

#include <deque>

#include "nudge/detect.hpp"

namespace nudge {

/// Which counter drives lull detection.
enum class LullBasis { Score, Silence };

struct ScoreConfig {
  int window_s = 20;          // sliding window W
  int lull_threshold = 30;    // T, score units
  int lull_duration_s = 120;  // D
  LullBasis basis = LullBasis::Score;

  void validate() const;
};

// Rolling conversation level. `score` is the rounded percentage of Speech
// seconds in the occupied part of the window; during warm-up the occupied part
// is shorter than the window.
struct ConversationState {
  Second t = -1;  // last second folded in; -1 before the first update
  int score = 0;
  std::deque<bool> window;
  Second below_threshold_run = 0;
  Second silence_run = 0;

  int speech_in_window() const;
  bool last_speech() const { return !window.empty() && window.back(); }

  bool operator==(const ConversationState&) const = default;
};

/// Rounded percentage, half away from zero, in integer arithmetic.
int percent_round(int count, int total);

/// Folds one classified second in. Throws ErrorKind::Sequencing unless
/// ev.t == state.t + 1.
ConversationState update(const ConversationState& state,
                         const ClassifiedSecond& ev, const ScoreConfig& cfg);

bool is_lull(const ConversationState& state, const ScoreConfig& cfg);

}  // namespace nudge
