#include "nudge/policy.hpp"

#include <cmath>

namespace nudge {

std::string_view to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::Watching: return "watching";
    case PolicyMode::Evaluating: return "evaluating";
    case PolicyMode::LightOnly: return "light_only";
    case PolicyMode::Disarmed: return "disarmed";
  }
  return "?";
}

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::LightOn: return "LightOn";
    case ActionKind::LightOff: return "LightOff";
    case ActionKind::PlayAudio: return "PlayAudio";
    case ActionKind::GaveUp: return "GaveUp";
    case ActionKind::NoContent: return "NoContent";
  }
  return "?";
}

void PolicyConfig::validate() const {
  if (base_gap_s < 0) throw Error(ErrorKind::Config, "policy: base_gap_s must be >= 0");
  if (!(backoff_multiplier >= 1.0)) {
    throw Error(ErrorKind::Config, "policy: backoff_multiplier must be >= 1");
  }
  if (backoff_additive_s < 0) {
    throw Error(ErrorKind::Config, "policy: backoff_additive_s must be >= 0");
  }
  if (max_audio_attempts < 0) {
    throw Error(ErrorKind::Config, "policy: max_audio_attempts must be >= 0");
  }
  if (eval_window_s < 1) throw Error(ErrorKind::Config, "policy: eval_window_s must be >= 1");
  if (base_gap_s < eval_window_s) {
    throw Error(ErrorKind::Config, "policy: base_gap_s must be >= eval_window_s");
  }
  if (!(success_margin >= 0.0 && success_margin <= 1.0)) {
    throw Error(ErrorKind::Config, "policy: success_margin must be in [0, 1]");
  }
  if (light_hysteresis < 0) {
    throw Error(ErrorKind::Config, "policy: light_hysteresis must be >= 0");
  }
}

PolicyState initial_policy_state(const PolicyConfig& cfg) {
  PolicyState ps;
  if (cfg.max_audio_attempts == 0) {
    ps.mode = PolicyMode::LightOnly;
  } else if (!cfg.auto_enabled) {
    ps.mode = PolicyMode::Disarmed;
  }
  return ps;
}

nlohmann::json to_json(const Action& action) {
  nlohmann::json j{{"t", action.t}, {"kind", to_string(action.kind)}};
  if (action.item) {
    j["item_id"] = action.item->id;
    j["text"] = action.item->text;
    if (!action.item->audio_ref.empty()) j["audio_ref"] = action.item->audio_ref;
  }
  if (action.kind == ActionKind::PlayAudio) {
    j["source"] = action.source == NudgeSource::Auto ? "auto" : "wizard";
  }
  return j;
}

double speech_ratio(const std::deque<SecondFlag>& flags, std::size_t first,
                    std::size_t last) {
  int speech = 0;
  int counted = 0;
  for (std::size_t i = first; i < last && i < flags.size(); ++i) {
    if (flags[i] == SecondFlag::Intervention) continue;
    ++counted;
    if (flags[i] == SecondFlag::Speech) ++speech;
  }
  return counted == 0 ? 0.0 : static_cast<double>(speech) / counted;
}

bool evaluate(double pre_ratio, double post_ratio, const PolicyConfig& cfg) {
  // Compared with a 1e-12 allowance for binary rounding of decimal ratios.
  return post_ratio - pre_ratio >= cfg.success_margin - 1e-12;
}

Second backoff_gap(const PolicyConfig& cfg, int prior_failures) {
  const double scaled =
      cfg.base_gap_s * std::pow(cfg.backoff_multiplier, prior_failures);
  return static_cast<Second>(std::llround(scaled)) +
         static_cast<Second>(cfg.backoff_additive_s) * prior_failures;
}

TickOutcome on_tick(const PolicyState& ps, const ConversationState& cs, Second t,
                    const PolicyConfig& pcfg, const ScoreConfig& scfg,
                    const ContentRequest& content) {
  TickOutcome out{ps, {}, std::nullopt};
  PolicyState& s = out.state;

  const SecondFlag flag = s.last_play_t == t ? SecondFlag::Intervention
                          : cs.last_speech() ? SecondFlag::Speech
                                             : SecondFlag::NonSpeech;
  s.recent.push_back(flag);
  const auto capacity = static_cast<std::size_t>(pcfg.eval_window_s) + 1;
  while (s.recent.size() > capacity) s.recent.pop_front();

  if (pcfg.light_enabled) {
    if (!s.light_on && cs.score < scfg.lull_threshold) {
      s.light_on = true;
      out.actions.push_back({t, ActionKind::LightOn, std::nullopt, NudgeSource::Auto});
    } else if (s.light_on && cs.score >= scfg.lull_threshold + pcfg.light_hysteresis) {
      s.light_on = false;
      out.actions.push_back({t, ActionKind::LightOff, std::nullopt, NudgeSource::Auto});
    }
  } else if (s.light_on) {
    s.light_on = false;
    out.actions.push_back({t, ActionKind::LightOff, std::nullopt, NudgeSource::Auto});
  }

  if (s.mode == PolicyMode::Evaluating && s.pending &&
      t == s.pending->nudge_t + pcfg.eval_window_s) {
    // Post window is (nudge_t, t]: the newest E flags.
    const double post = speech_ratio(s.recent, s.recent.size() - pcfg.eval_window_s,
                                     s.recent.size());
    const bool success = evaluate(s.pending->pre_ratio, post, pcfg);
    out.evaluation = Evaluation{s.pending->nudge_t, s.pending->pre_ratio, post, success};
    s.pending.reset();
    if (success) {
      s.attempts_failed = 0;
      s.next_eligible_t = t + backoff_gap(pcfg, 0);
      s.mode = PolicyMode::Watching;
    } else {
      s.next_eligible_t = t + backoff_gap(pcfg, s.attempts_failed);
      ++s.attempts_failed;
      if (s.attempts_failed >= pcfg.max_audio_attempts) {
        s.mode = PolicyMode::LightOnly;
        out.actions.push_back({t, ActionKind::GaveUp, std::nullopt, NudgeSource::Auto});
      } else {
        s.mode = PolicyMode::Watching;
      }
    }
    out.evaluation->next_eligible_t = s.next_eligible_t;
  }

  const bool lull = is_lull(cs, scfg);
  if (!lull) s.lull_skipped = false;

  if (s.mode == PolicyMode::Watching && lull && !s.lull_skipped &&
      t >= s.next_eligible_t && s.last_play_t != t) {
    if (auto item = content ? content() : std::nullopt) {
      // Pre window is [t - E, t): everything but the newest flag.
      const double pre = speech_ratio(s.recent, 0, s.recent.size() - 1);
      s.pending = PendingEval{t, pre};
      s.mode = PolicyMode::Evaluating;
      s.last_play_t = t;
      s.recent.back() = SecondFlag::Intervention;
      out.actions.push_back({t, ActionKind::PlayAudio, std::move(item), NudgeSource::Auto});
    } else {
      s.lull_skipped = true;
      out.actions.push_back({t, ActionKind::NoContent, std::nullopt, NudgeSource::Auto});
    }
  }
  return out;
}

WizardOutcome wizard_play(const PolicyState& ps, NudgeRef item, Second t) {
  if (ps.last_play_t == t) {
    throw Error(ErrorKind::Rate,
                "an intervention already played at t=" + std::to_string(t));
  }
  WizardOutcome out{ps, {t, ActionKind::PlayAudio, std::move(item), NudgeSource::Wizard}};
  out.state.last_play_t = t;
  return out;
}

PolicyState set_auto(const PolicyState& ps, bool enabled) {
  PolicyState s = ps;
  if (s.mode == PolicyMode::LightOnly) return s;
  if (enabled) {
    if (s.mode == PolicyMode::Disarmed) s.mode = PolicyMode::Watching;
  } else {
    s.mode = PolicyMode::Disarmed;
    s.pending.reset();
  }
  return s;
}

}  // namespace nudge
