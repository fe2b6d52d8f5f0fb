#include "nudge/score.hpp"

#include <algorithm>

namespace nudge {

void ScoreConfig::validate() const {
  if (window_s < 1) throw Error(ErrorKind::Config, "score: window_s must be >= 1");
  if (lull_threshold <= 0 || lull_threshold >= 100) {
    throw Error(ErrorKind::Config, "score: lull_threshold must be in (0, 100)");
  }
  if (lull_duration_s < 1) {
    throw Error(ErrorKind::Config, "score: lull_duration_s must be >= 1");
  }
}

int ConversationState::speech_in_window() const {
  return static_cast<int>(std::count(window.begin(), window.end(), true));
}

int percent_round(int count, int total) {
  return (200 * count + total) / (2 * total);
}

ConversationState update(const ConversationState& state,
                         const ClassifiedSecond& ev, const ScoreConfig& cfg) {
  if (ev.t != state.t + 1) {
    throw Error(ErrorKind::Sequencing,
                "score: expected t=" + std::to_string(state.t + 1) + ", got t=" +
                    std::to_string(ev.t));
  }
  ConversationState next = state;
  next.t = ev.t;
  next.window.push_back(ev.speech());
  while (next.window.size() > static_cast<std::size_t>(cfg.window_s)) {
    next.window.pop_front();
  }
  next.score = percent_round(next.speech_in_window(),
                             static_cast<int>(next.window.size()));
  next.below_threshold_run =
      next.score < cfg.lull_threshold ? state.below_threshold_run + 1 : 0;
  next.silence_run = ev.speech() ? 0 : state.silence_run + 1;
  return next;
}

bool is_lull(const ConversationState& state, const ScoreConfig& cfg) {
  const Second run = cfg.basis == LullBasis::Score ? state.below_threshold_run
                                                   : state.silence_run;
  return run >= cfg.lull_duration_s;
}

}  // namespace nudge
