#include "nudge/session.hpp"

#include <chrono>
#include <thread>

namespace nudge {

nlohmann::json SessionStatus::to_json() const {
  nlohmann::json j{{"session_id", session_id},
                   {"running", running},
                   {"finished", finished},
                   {"t", t},
                   {"score", score},
                   {"light_on", light_on},
                   {"mode", auto_mode ? "auto" : "wizard"},
                   {"policy_mode", to_string(policy_mode)},
                   {"attempts_failed", attempts_failed},
                   {"telemetry", to_string(telemetry)}};
  j["last_action"] = last_action ? nudge::to_json(*last_action) : nlohmann::json(nullptr);
  if (!abort_reason.empty()) j["abort_reason"] = abort_reason;
  return j;
}

nlohmann::json TickEvent::to_json() const {
  nlohmann::json j{{"t", t},
                   {"score", score},
                   {"speech", speech == SpeechCell::True    ? "TRUE"
                              : speech == SpeechCell::False ? "FALSE"
                                                            : "-"},
                   {"light", light}};
  if (!actions.empty()) {
    j["action"] = nlohmann::json::array();
    for (const auto& a : actions) j["action"].push_back(nudge::to_json(a));
  }
  return j;
}

Session::Session(SessionConfig cfg, std::unique_ptr<Detector> detector, Corpus corpus,
                 std::unique_ptr<TelemetryTransport> transport)
    : cfg_(std::move(cfg)),
      detector_(std::move(detector)),
      corpus_(std::move(corpus)),
      content_(corpus_, cfg_.content.mode, cfg_.content.preferred_genres,
               cfg_.content.genre_token, cfg_.content.seed),
      ps_(initial_policy_state(cfg_.policy)) {
  cfg_.validate();
  log_.session_id = cfg_.session_id;
  log_.group = cfg_.arm;
  log_.metadata.friendship_duration = cfg_.participants.friendship_duration;
  log_.metadata.intimacy_pre = cfg_.participants.intimacy_pre;
  log_.metadata.intimacy_post = cfg_.participants.intimacy_post;
  log_.metadata.preferred_genres.assign(cfg_.content.preferred_genres.begin(),
                                        cfg_.content.preferred_genres.end());
  log_.metadata.config = nudge::to_json(cfg_);

  if (cfg_.telemetry.enabled()) {
    if (!transport) transport = std::make_unique<HttpTransport>(cfg_.telemetry);
    uploader_ = std::make_unique<TelemetryUploader>(cfg_.telemetry, cfg_.session_id,
                                                    std::move(transport));
  }

  if (cfg_.out_dir) {
    std::filesystem::create_directories(*cfg_.out_dir);
    const auto path = *cfg_.out_dir / (cfg_.session_id + ".csv");
    csv_.open(path, std::ios::binary | std::ios::trunc);
    if (!csv_) throw Error(ErrorKind::Io, "cannot write " + path.string());
    csv_ << kCsvHeader << '\n';
    csv_.flush();
  }

  status_.session_id = cfg_.session_id;
  status_.running = true;
  status_.auto_mode = ps_.mode != PolicyMode::Disarmed;
  status_.policy_mode = ps_.mode;
  status_.telemetry = uploader_ ? TelemetryStatus::Ok : TelemetryStatus::Disabled;
}

Session::~Session() {
  try {
    finish();
  } catch (...) {
  }
}

void Session::add_listener(TickListener listener) { listeners_.push_back(std::move(listener)); }

SessionStatus Session::status() const {
  std::lock_guard lock(mu_);
  SessionStatus s = status_;
  if (uploader_) s.telemetry = uploader_->status();
  return s;
}

void Session::request_stop() { stop_ = true; }

Second Session::submit_wizard(const WizardRequest& req) {
  std::lock_guard lock(mu_);
  if (!status_.running) throw Error(ErrorKind::State, "session is not running");
  if (cfg_.arm == Group::Control) {
    throw Error(ErrorKind::State, "control sessions do not play nudges");
  }
  if (pending_wizard_) {
    throw Error(ErrorKind::Rate, "a nudge is already queued for the next second");
  }
  // content_ is only mutated on the tick thread while holding mu_.
  content_.check_wizard(req);
  pending_wizard_ = req;
  return next_t_;
}

Second Session::set_auto(bool enabled) {
  std::lock_guard lock(mu_);
  if (!status_.running) throw Error(ErrorKind::State, "session is not running");
  pending_auto_ = enabled;
  return next_t_;
}

void Session::add_note(Note note) {
  std::lock_guard lock(mu_);
  if (status_.finished) throw Error(ErrorKind::State, "session has finished");
  pending_notes_.push_back(std::move(note));
}

void Session::publish(const TickEvent& ev) {
  for (const auto& l : listeners_) l(ev);
}

bool Session::tick() {
  if (ended_) return false;
  const Second t = cs_.t + 1;
  if (stop_ || (cfg_.duration_s > 0 && t >= cfg_.duration_s)) {
    finish();
    return false;
  }

  std::optional<WizardRequest> wizard;
  std::optional<bool> auto_switch;
  {
    std::lock_guard lock(mu_);
    wizard = std::exchange(pending_wizard_, std::nullopt);
    auto_switch = std::exchange(pending_auto_, std::nullopt);
    next_t_ = t + 1;
    for (auto& n : pending_notes_) log_.metadata.notes.push_back(std::move(n));
    pending_notes_.clear();
  }
  if (auto_switch) ps_ = nudge::set_auto(ps_, *auto_switch);

  auto ev = detector_->next();
  if (!ev) {
    finish();
    return false;
  }
  if (ev->t != t) {
    throw Error(ErrorKind::Sequencing, "detector produced t=" + std::to_string(ev->t) +
                                           ", expected t=" + std::to_string(t));
  }

  TickEvent out;
  out.t = t;

  // The device's own playback owns an intervention second: it is scored as
  // NonSpeech and logged with '-'.
  std::optional<NudgeRef> wizard_item;
  if (wizard) {
    std::lock_guard lock(mu_);
    try {
      wizard_item = content_.next_wizard(*wizard);
    } catch (const Error&) {
      // Content ran out between submission and this tick.
      out.actions.push_back({t, ActionKind::NoContent, std::nullopt, NudgeSource::Wizard});
    }
  }
  ClassifiedSecond masked{t, SpeechLabel::NonSpeech, 1.0};
  const ConversationState before = cs_;
  cs_ = update(before, wizard_item ? masked : *ev, cfg_.score);

  if (wizard_item) {
    auto w = wizard_play(ps_, std::move(*wizard_item), t);
    ps_ = std::move(w.state);
    out.actions.push_back(std::move(w.action));
  }

  TickOutcome step;
  {
    std::lock_guard lock(mu_);
    step = on_tick(ps_, cs_, t, cfg_.policy, cfg_.score,
                   [this] { return content_.next_auto(); });
  }
  ps_ = std::move(step.state);
  bool played = wizard_item.has_value();
  for (auto& a : step.actions) {
    if (a.kind == ActionKind::PlayAudio && !played) {
      played = true;
      cs_ = update(before, masked, cfg_.score);
    }
    out.actions.push_back(std::move(a));
  }
  if (step.evaluation) evaluations_.push_back(*step.evaluation);
  out.evaluation = step.evaluation;

  SessionRecord rec;
  rec.time = cfg_.start_time + std::chrono::seconds(t);
  rec.score = cs_.score;
  rec.intervention = played;
  rec.speech = played ? SpeechCell::None : ev->speech() ? SpeechCell::True : SpeechCell::False;
  log_.append(rec);
  if (csv_.is_open()) {
    csv_ << csv_row(rec) << '\n';
    csv_.flush();
  }
  if (uploader_) uploader_->enqueue(t, rec);

  out.score = cs_.score;
  out.speech = rec.speech;
  out.light = ps_.light_on;
  {
    std::lock_guard lock(mu_);
    status_.t = t;
    status_.score = cs_.score;
    status_.light_on = ps_.light_on;
    status_.policy_mode = ps_.mode;
    status_.auto_mode = ps_.mode != PolicyMode::Disarmed;
    status_.attempts_failed = ps_.attempts_failed;
    if (!out.actions.empty()) status_.last_action = out.actions.back();
  }
  publish(out);
  return true;
}

void Session::finish() {
  if (ended_) return;
  ended_ = true;
  {
    std::lock_guard lock(mu_);
    for (auto& n : pending_notes_) log_.metadata.notes.push_back(std::move(n));
    pending_notes_.clear();
    status_.running = false;
    status_.finished = true;
  }
  if (csv_.is_open()) csv_.close();
  if (cfg_.out_dir) {
    write_text_file(*cfg_.out_dir / (cfg_.session_id + ".meta.json"),
                    metadata_to_json(log_).dump(2) + "\n");
  }
  if (uploader_) {
    const auto s = uploader_->finish(std::chrono::seconds(5));
    std::lock_guard lock(mu_);
    status_.telemetry = s;
  }
}

const SessionLog& Session::run() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::milliseconds(cfg_.tick_period_ms);
  const auto start = clock::now();
  try {
    while (true) {
      if (cfg_.realtime) {
        // Tick n fires at start + n * period, so sleep overshoot never
        // accumulates.
        const auto due = start + period * (cs_.t + 1);
        while (!stop_ && clock::now() < due) {
          std::this_thread::sleep_until(std::min(due, clock::now() + std::chrono::milliseconds(50)));
        }
      }
      if (!tick()) break;
    }
  } catch (const Error& e) {
    {
      std::lock_guard lock(mu_);
      status_.abort_reason = e.what();
    }
    finish();
  }
  return log_;
}

std::unique_ptr<Session> make_session(const SessionConfig& cfg,
                                      std::unique_ptr<TelemetryTransport> transport) {
  cfg.validate();
  std::unique_ptr<Detector> detector;
  DyadDetector* dyad = nullptr;
  switch (cfg.mode) {
    case RunMode::Replay:
      detector = std::make_unique<TraceDetector>(load_trace(*cfg.trace));
      break;
    case RunMode::Live:
      detector = std::make_unique<EnergyDetector>(
          std::make_unique<WavFrameSource>(*cfg.audio), cfg.detector);
      break;
    case RunMode::Simulate: {
      auto d = std::make_unique<DyadDetector>(cfg.dyad, cfg.dyad_seed);
      dyad = d.get();
      detector = std::move(d);
      break;
    }
  }
  auto session = std::make_unique<Session>(cfg, std::move(detector),
                                           resolve_corpus(cfg.content), std::move(transport));
  if (dyad) {
    session->add_listener([dyad](const TickEvent& ev) {
      for (const auto& a : ev.actions) {
        if (a.kind == ActionKind::PlayAudio) dyad->notify_nudge(ev.t);
      }
    });
  }
  return session;
}

}  // namespace nudge
