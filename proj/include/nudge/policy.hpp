#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nudge/content.hpp"
#include "nudge/score.hpp"

namespace nudge {

enum class PolicyMode { Watching, Evaluating, LightOnly, Disarmed };

std::string_view to_string(PolicyMode mode);

struct PolicyConfig {
  int base_gap_s = 120;             // I0
  double backoff_multiplier = 2.0;  // m
  int backoff_additive_s = 0;       // extra seconds per consecutive failure
  int max_audio_attempts = 3;       // A
  int eval_window_s = 60;           // E
  double success_margin = 0.10;     // delta, speech-ratio units
  bool light_enabled = true;
  bool auto_enabled = true;
  int light_hysteresis = 0;         // LightOff needs score >= T + this

  void validate() const;
};

/// Per-second flag kept for windowed speech ratios.
enum class SecondFlag : std::uint8_t { NonSpeech, Speech, Intervention };

struct PendingEval {
  Second nudge_t = 0;
  double pre_ratio = 0.0;

  bool operator==(const PendingEval&) const = default;
};

struct PolicyState {
  PolicyMode mode = PolicyMode::Watching;
  int attempts_failed = 0;
  Second next_eligible_t = 0;
  std::optional<PendingEval> pending;  // present iff mode == Evaluating
  bool light_on = false;
  Second last_play_t = -1;
  bool lull_skipped = false;  // NoContent seen during the current lull
  std::deque<SecondFlag> recent;  // last E + 1 seconds, newest at back

  bool operator==(const PolicyState&) const = default;
};

PolicyState initial_policy_state(const PolicyConfig& cfg);

enum class ActionKind { LightOn, LightOff, PlayAudio, GaveUp, NoContent };
enum class NudgeSource { Auto, Wizard };

std::string_view to_string(ActionKind kind);

struct Action {
  Second t = 0;
  ActionKind kind = ActionKind::LightOn;
  std::optional<NudgeRef> item;  // PlayAudio only
  NudgeSource source = NudgeSource::Auto;
};

/// Wire form: {t, kind, item_id?, source?, text?}.
nlohmann::json to_json(const Action& action);

struct Evaluation {
  Second nudge_t = 0;
  double pre_ratio = 0.0;
  double post_ratio = 0.0;
  bool success = false;
  Second next_eligible_t = 0;  // when auto audio may next fire
};

struct TickOutcome {
  PolicyState state;
  std::vector<Action> actions;
  std::optional<Evaluation> evaluation;
};

/// Content handle for auto nudges; nullopt means nothing left to play.
using ContentRequest = std::function<std::optional<NudgeRef>()>;

/// Speech ratio over flags, ignoring intervention seconds. Empty -> 0.
double speech_ratio(const std::deque<SecondFlag>& flags, std::size_t first,
                    std::size_t last);

/// True iff post - pre >= margin.
bool evaluate(double pre_ratio, double post_ratio, const PolicyConfig& cfg);

/// Eligibility gap after an evaluation that followed `prior_failures`
/// consecutive failures: round(I0 * m^k) + additive * k.
Second backoff_gap(const PolicyConfig& cfg, int prior_failures);

// One policy step. Must be called once per second, after the score update for
// second t. Light follows score < T; audio fires on a lull once the back-off
// gap has elapsed and is evaluated E seconds later.
TickOutcome on_tick(const PolicyState& ps, const ConversationState& cs, Second t,
                    const PolicyConfig& pcfg, const ScoreConfig& scfg,
                    const ContentRequest& content);

struct WizardOutcome {
  PolicyState state;
  Action action;
};

/// Operator-fired nudge. Plays in every mode, including LightOnly; does not
/// touch the attempt counter or start an evaluation. Throws ErrorKind::Rate
/// if something already played at t.
WizardOutcome wizard_play(const PolicyState& ps, NudgeRef item, Second t);

/// Switch between automatic and wizard operation. LightOnly is sticky.
PolicyState set_auto(const PolicyState& ps, bool enabled);

}  // namespace nudge
