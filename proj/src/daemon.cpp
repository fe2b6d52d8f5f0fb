#include "nudge/daemon.hpp"

#include <charconv>
#include <cstdlib>

#include "httplib.h"

namespace nudge {

ListenAddress parse_listen_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::Config, "listen address must be host:port, got '" +
                                       std::string(text) + "'");
  }
  ListenAddress addr;
  if (colon > 0) addr.host = std::string(text.substr(0, colon));
  const auto port = text.substr(colon + 1);
  int value = -1;
  const auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || end != port.data() + port.size() || value < 0 || value > 65535) {
    throw Error(ErrorKind::Config, "bad port in listen address '" + std::string(text) + "'");
  }
  addr.port = value;
  return addr;
}

ListenAddress listen_address_from_env() {
  if (const char* v = std::getenv("NUDGE_LISTEN"); v && *v) return parse_listen_address(v);
  return {};
}

// --- EventHub --------------------------------------------------------------

std::shared_ptr<EventHub::Subscriber> EventHub::subscribe() {
  auto sub = std::make_shared<Subscriber>();
  std::lock_guard lock(mu_);
  subs_.push_back(sub);
  return sub;
}

void EventHub::unsubscribe(const std::shared_ptr<Subscriber>& sub) {
  std::lock_guard lock(mu_);
  std::erase(subs_, sub);
}

void EventHub::publish(const std::string& event, const nlohmann::json& data) {
  const std::string frame = "event: " + event + "\ndata: " + data.dump() + "\n\n";
  std::lock_guard lock(mu_);
  for (const auto& s : subs_) {
    {
      std::lock_guard sl(s->mu);
      s->queue.push_back(frame);
    }
    s->cv.notify_all();
  }
}

void EventHub::close_all() {
  std::lock_guard lock(mu_);
  for (const auto& s : subs_) {
    {
      std::lock_guard sl(s->mu);
      s->closed = true;
    }
    s->cv.notify_all();
  }
}

std::size_t EventHub::subscribers() const {
  std::lock_guard lock(mu_);
  return subs_.size();
}

// --- HTTP helpers ----------------------------------------------------------

namespace {

void reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view reason,
                 std::string_view message) {
  reply(res, status, {{"error", reason}, {"message", message}});
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorKind::Input, "request body must be a JSON object");
  }
  return j;
}

// Runs a handler, mapping failures onto status codes.
template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ConflictError& c) {
    reply_error(res, 409, c.reason(), c.what());
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::State:
        reply_error(res, 409, "not_running", e.what());
        break;
      case ErrorKind::Rate:
        reply_error(res, 429, "rate_limited", e.what());
        break;
      case ErrorKind::NoContent:
      case ErrorKind::StoryExhausted:
      case ErrorKind::UnknownGenre:
        reply_error(res, 422, to_string(e.kind()), e.what());
        break;
      default:
        reply_error(res, 400, to_string(e.kind()), e.what());
    }
  } catch (const nlohmann::json::exception& e) {
    reply_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, "internal", e.what());
  }
}

}  // namespace

// --- Daemon ----------------------------------------------------------------

Daemon::Daemon(nlohmann::json base, std::filesystem::path base_dir)
    : base_(std::move(base)), base_dir_(std::move(base_dir)),
      server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;

  srv.Get("/v1/session/status", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, status()); });
  });

  srv.Post("/v1/session/start", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, start_session(parse_body(req)).to_json()); });
  });

  srv.Post("/v1/session/stop", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, stop_session().to_json()); });
  });

  // Returns the live session or throws a Conflict naming why there is none.
  auto live = [this]() {
    std::lock_guard lock(mu_);
    if (!session_) throw ConflictError("no_session", "no session has been started");
    if (!session_->status().running) {
      throw ConflictError("session_finished", "the session has finished");
    }
    return session_;
  };

  srv.Post("/v1/mode", [live](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      const std::string mode = body.at("mode").get<std::string>();
      if (mode != "auto" && mode != "wizard") {
        throw Error(ErrorKind::Input, "mode must be \"auto\" or \"wizard\"");
      }
      auto s = live();
      const Second at = s->set_auto(mode == "auto");
      reply(res, 202, {{"mode", mode}, {"applies_at", at}});
    });
  });

  srv.Post("/v1/nudge", [live](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      WizardRequest w;
      for (const auto& [key, value] : body.items()) {
        if (key == "genre") w.genre = value.get<std::string>();
        else if (key == "item_id") w.item_id = value.get<std::string>();
        else if (key == "story_id") w.story_id = value.get<std::string>();
        else if (key == "segment") {
          const auto seg = value.get<long long>();
          if (seg < 0) throw Error(ErrorKind::Input, "segment must be >= 0");
          w.segment = static_cast<std::size_t>(seg);
        }
        else throw Error(ErrorKind::Input, "unknown nudge field '" + key + "'");
      }
      auto s = live();
      if (s->config().arm == Group::Control) {
        throw ConflictError("control_arm", "control sessions do not play nudges");
      }
      const Second at = s->submit_wizard(w);
      reply(res, 202, {{"queued", true}, {"applies_at", at}});
    });
  });

  srv.Post("/v1/note", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      std::shared_ptr<Session> s;
      {
        std::lock_guard lock(mu_);
        s = session_;
      }
      if (!s) throw ConflictError("no_session", "no session has been started");
      Note note;
      note.text = body.at("text").get<std::string>();
      note.t = body.contains("t") ? body["t"].get<Second>()
                                  : std::max<Second>(0, s->status().t);
      if (note.t < 0) throw Error(ErrorKind::Input, "note t must be >= 0");
      if (s->status().finished) {
        throw ConflictError("session_finished", "the session has finished");
      }
      s->add_note(note);
      reply(res, 202, {{"t", note.t}, {"text", note.text}});
    });
  });

  srv.Get("/v1/events", [this](const httplib::Request&, httplib::Response& res) {
    auto sub = hub_.subscribe();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [sub](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(sub->mu);
          if (sub->queue.empty() && !sub->closed) {
            sub->cv.wait_for(lock, std::chrono::seconds(1));
          }
          if (sub->queue.empty()) {
            if (sub->closed) {
              sink.done();
              return true;
            }
            // Keeps idle connections alive and detects closed clients.
            static const std::string ping = ": ping\n\n";
            return sink.write(ping.data(), ping.size());
          }
          while (!sub->queue.empty()) {
            const std::string frame = std::move(sub->queue.front());
            sub->queue.pop_front();
            if (!sink.write(frame.data(), frame.size())) return false;
          }
          return true;
        },
        [this, sub](bool) { hub_.unsubscribe(sub); });
  });
}

Daemon::~Daemon() {
  try {
    stop();
  } catch (...) {
  }
}

void Daemon::listen(const ListenAddress& addr) {
  if (addr.port == 0) {
    port_ = server_->bind_to_any_port(addr.host);
  } else {
    port_ = server_->bind_to_port(addr.host, addr.port) ? addr.port : -1;
  }
  if (port_ <= 0) {
    throw Error(ErrorKind::Io,
                "cannot listen on " + addr.host + ":" + std::to_string(addr.port));
  }
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void Daemon::wait() {
  if (server_thread_.joinable()) server_thread_.join();
}

void Daemon::stop() {
  {
    std::lock_guard lock(mu_);
    if (session_) session_->request_stop();
  }
  {
    std::lock_guard lock(mu_);
    reap_locked();
  }
  hub_.close_all();
  server_->stop();
  if (server_thread_.joinable() && server_thread_.get_id() != std::this_thread::get_id()) {
    server_thread_.join();
  }
}

void Daemon::reap_locked() {
  if (session_thread_.joinable()) session_thread_.join();
}

SessionStatus Daemon::start_session(const nlohmann::json& overrides) {
  std::lock_guard lock(mu_);
  if (session_ && session_->status().running) {
    throw ConflictError("session_running", "a session is already running");
  }
  reap_locked();

  nlohmann::json j = base_;
  j.merge_patch(overrides);
  SessionConfig cfg = parse_session_config(j, base_dir_);
  cfg.apply_arm();
  std::shared_ptr<Session> session = make_session(cfg);
  session->add_listener([this](const TickEvent& ev) { hub_.publish("tick", ev.to_json()); });

  session_ = session;
  session_thread_ = std::thread([this, session] {
    session->run();
    hub_.publish("end", session->status().to_json());
  });
  return session->status();
}

SessionStatus Daemon::stop_session() {
  std::lock_guard lock(mu_);
  if (!session_) throw ConflictError("no_session", "no session has been started");
  if (!session_->status().running) {
    throw ConflictError("session_finished", "the session has already finished");
  }
  session_->request_stop();
  reap_locked();
  return session_->status();
}

nlohmann::json Daemon::status() const {
  std::lock_guard lock(mu_);
  if (!session_) {
    return {{"session_id", nullptr}, {"running", false}, {"finished", false}};
  }
  return session_->status().to_json();
}

}  // namespace nudge
