#pragma once

#include <atomic>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nudge/config.hpp"

namespace nudge {

/// Snapshot published once per completed tick.
struct SessionStatus {
  std::string session_id;
  bool running = false;
  bool finished = false;
  Second t = -1;
  int score = 0;
  bool light_on = false;
  bool auto_mode = true;
  PolicyMode policy_mode = PolicyMode::Watching;
  int attempts_failed = 0;
  std::optional<Action> last_action;
  TelemetryStatus telemetry = TelemetryStatus::Disabled;
  std::string abort_reason;

  nlohmann::json to_json() const;
};

/// Per-tick event: {t, score, speech, light, action?}.
struct TickEvent {
  Second t = 0;
  int score = 0;
  SpeechCell speech = SpeechCell::False;
  bool light = false;
  std::vector<Action> actions;
  std::optional<Evaluation> evaluation;

  nlohmann::json to_json() const;
};

using TickListener = std::function<void(const TickEvent&)>;

// One session. A single thread calls tick()/run(); status(), submit_wizard(),
// set_auto(), add_note() and request_stop() may be called from any thread.
// Commands are queued and take effect at the start of the next tick.
class Session {
public:
  Session(SessionConfig cfg, std::unique_ptr<Detector> detector, Corpus corpus,
          std::unique_ptr<TelemetryTransport> transport = nullptr);
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Advances one second. Returns false once the session has ended.
  bool tick();

  /// Ticks until the input ends, duration elapses, or stop is requested.
  /// Paces on a monotonic clock when cfg.realtime. Detector failures abort
  /// the session cleanly; the partial log is kept.
  const SessionLog& run();

  void request_stop();

  /// Validates and queues an operator nudge for the next tick. Throws
  /// ErrorKind::State when the session is not live, ErrorKind::Rate when a
  /// nudge is already queued, and content errors for unplayable requests.
  /// Returns the second the nudge will play at.
  Second submit_wizard(const WizardRequest& req);
  /// Queues a switch between automatic and wizard operation.
  Second set_auto(bool enabled);  // returns the second it takes effect
  void add_note(Note note);

  void add_listener(TickListener listener);

  SessionStatus status() const;
  const SessionLog& log() const { return log_; }
  const SessionConfig& config() const { return cfg_; }
  const std::vector<Evaluation>& evaluations() const { return evaluations_; }
  TelemetryUploader* telemetry() { return uploader_.get(); }

private:
  void finish();
  void publish(const TickEvent& ev);

  SessionConfig cfg_;
  std::unique_ptr<Detector> detector_;
  Corpus corpus_;
  SessionContent content_;
  std::unique_ptr<TelemetryUploader> uploader_;

  ConversationState cs_;
  PolicyState ps_;
  SessionLog log_;
  std::vector<Evaluation> evaluations_;
  std::vector<TickListener> listeners_;
  std::ofstream csv_;
  bool ended_ = false;
  bool started_ = false;

  mutable std::mutex mu_;  // guards everything below
  SessionStatus status_;
  Second next_t_ = 0;  // the tick that will pick up queued commands
  std::optional<WizardRequest> pending_wizard_;
  std::optional<bool> pending_auto_;
  std::vector<Note> pending_notes_;
  std::atomic<bool> stop_{false};
};

/// Builds the detector the config asks for. For simulate mode the dyad is
/// wired to the session's nudges through a listener.
std::unique_ptr<Session> make_session(const SessionConfig& cfg,
                                      std::unique_ptr<TelemetryTransport> transport = nullptr);

}  // namespace nudge
