#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "json.hpp"
#include "nudge/session.hpp"

namespace httplib {
class Server;
}

namespace nudge {

/// Command refused in the current state; reason is machine-readable
/// ("no_session", "session_running", "session_finished", "control_arm").
class ConflictError : public Error {
public:
  ConflictError(std::string reason, const std::string& message)
      : Error(ErrorKind::State, message), reason_(std::move(reason)) {}
  const std::string& reason() const { return reason_; }

private:
  std::string reason_;
};

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 8765;
};

/// "host:port" or ":port". Throws ErrorKind::Config.
ListenAddress parse_listen_address(std::string_view text);
/// NUDGE_LISTEN when set, otherwise the default.
ListenAddress listen_address_from_env();

// Fan-out of serialized events to any number of stream subscribers.
class EventHub {
public:
  struct Subscriber {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> queue;  // complete SSE frames
    bool closed = false;
  };

  std::shared_ptr<Subscriber> subscribe();
  void unsubscribe(const std::shared_ptr<Subscriber>& sub);
  void publish(const std::string& event, const nlohmann::json& data);
  void close_all();
  std::size_t subscribers() const;

private:
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Subscriber>> subs_;
};

// HTTP control surface for one session at a time:
//   GET  /v1/session/status     POST /v1/session/start   POST /v1/session/stop
//   POST /v1/mode               POST /v1/nudge           POST /v1/note
//   GET  /v1/events             (text/event-stream, one "tick" per second)
// Commands in the wrong state answer 409 with {"error": <reason>, "message"}.
class Daemon {
public:
  /// `base` is the config every started session is derived from; the start
  /// body may override any of its keys.
  explicit Daemon(nlohmann::json base = nlohmann::json::object(),
                  std::filesystem::path base_dir = {});
  ~Daemon();

  Daemon(const Daemon&) = delete;
  Daemon& operator=(const Daemon&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Throws ErrorKind::Io when the address cannot be bound.
  void listen(const ListenAddress& addr);
  int port() const { return port_; }
  /// Serves on the calling thread until stop() is called.
  void wait();
  /// Stops the session (if any) and the server.
  void stop();

  // The operations behind the endpoints, usable without HTTP.
  SessionStatus start_session(const nlohmann::json& overrides);
  SessionStatus stop_session();
  nlohmann::json status() const;

private:
  void reap_locked();

  nlohmann::json base_;
  std::filesystem::path base_dir_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  int port_ = 0;
  EventHub hub_;

  mutable std::mutex mu_;  // guards session_ / session_thread_
  std::shared_ptr<Session> session_;
  std::thread session_thread_;
};

}  // namespace nudge
