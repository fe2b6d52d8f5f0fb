#include <atomic>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "nudge/daemon.hpp"
#include "support.hpp"

using namespace nudge;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

// Simulated sessions paced quickly enough for tests.
json fast_base(int period_ms = 20, Second duration = 3600) {
  return {{"mode", "simulate"},
          {"session_id", "live"},
          {"duration_s", duration},
          {"realtime", true},
          {"tick_period_ms", period_ms},
          {"simulate", {{"profile", "responsive"}, {"seed", 3}}}};
}

json silent_dyad() {
  return {{"p_init_talk", 0.0}, {"p_continue_talk", 0.0}, {"p_resume_talk", 0.0},
          {"p_response", 0.0}};
}

struct Served {
  Daemon daemon;
  std::unique_ptr<httplib::Client> http;

  explicit Served(json base) : daemon(std::move(base)) {
    daemon.listen({"127.0.0.1", 0});
    http = std::make_unique<httplib::Client>("127.0.0.1", daemon.port());
    http->set_read_timeout(10, 0);
  }

  std::pair<int, json> post(const std::string& path, const json& body = json::object()) {
    auto res = http->Post(path, body.dump(), "application/json");
    REQUIRE(res);
    return {res->status, res->body.empty() ? json() : json::parse(res->body)};
  }
  std::pair<int, json> get(const std::string& path) {
    auto res = http->Get(path);
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
  }
};

struct SseEvent {
  std::string event;
  json data;
};

// Reads the event stream until `stop` says enough. Runs on its own client.
std::vector<SseEvent> read_events(int port,
                                  const std::function<bool(const std::vector<SseEvent>&)>& stop) {
  httplib::Client c("127.0.0.1", port);
  c.set_read_timeout(20, 0);
  std::vector<SseEvent> events;
  std::string buffer;
  c.Get("/v1/events", [&](const char* data, std::size_t n) {
    buffer.append(data, n);
    std::size_t end;
    while ((end = buffer.find("\n\n")) != std::string::npos) {
      const std::string frame = buffer.substr(0, end);
      buffer.erase(0, end + 2);
      if (frame.rfind(':', 0) == 0) continue;  // keep-alive comment
      SseEvent ev;
      std::size_t pos = 0;
      while (pos < frame.size()) {
        auto nl = frame.find('\n', pos);
        if (nl == std::string::npos) nl = frame.size();
        const std::string line = frame.substr(pos, nl - pos);
        if (line.rfind("event: ", 0) == 0) ev.event = line.substr(7);
        if (line.rfind("data: ", 0) == 0) ev.data = json::parse(line.substr(6));
        pos = nl + 1;
      }
      events.push_back(std::move(ev));
      if (stop(events)) return false;
    }
    return true;
  });
  return events;
}

}  // namespace

TEST_CASE("listen address parsing") {
  CHECK(parse_listen_address("0.0.0.0:9000").host == "0.0.0.0");
  CHECK(parse_listen_address("0.0.0.0:9000").port == 9000);
  CHECK(parse_listen_address(":81").host == "127.0.0.1");
  CHECK_THROWS_AS(parse_listen_address("localhost"), Error);
  CHECK_THROWS_AS(parse_listen_address("h:70000"), Error);
  CHECK_THROWS_AS(parse_listen_address("h:8x"), Error);
  unsetenv("NUDGE_LISTEN");
  CHECK(listen_address_from_env().port == 8765);
  setenv("NUDGE_LISTEN", "127.0.0.1:9999", 1);
  CHECK(listen_address_from_env().port == 9999);
  unsetenv("NUDGE_LISTEN");
}

TEST_CASE("event hub") {
  EventHub hub;
  auto a = hub.subscribe();
  auto b = hub.subscribe();
  hub.publish("tick", {{"t", 1}});
  CHECK(a->queue.front() == "event: tick\ndata: {\"t\":1}\n\n");
  CHECK(b->queue.size() == 1);
  hub.unsubscribe(a);
  hub.publish("tick", {{"t", 2}});
  CHECK(a->queue.size() == 1);
  CHECK(b->queue.size() == 2);
  hub.close_all();
  CHECK(b->closed);
  CHECK(hub.subscribers() == 1);
}

TEST_CASE("session lifecycle and conflicts") {
  Served s(fast_base());
  auto [code, body] = s.get("/v1/session/status");
  CHECK(code == 200);
  CHECK(body["running"] == false);
  CHECK(body["session_id"].is_null());

  CHECK(s.post("/v1/session/stop").second["error"] == "no_session");
  CHECK(s.post("/v1/session/stop").first == 409);
  CHECK(s.post("/v1/nudge").second["error"] == "no_session");
  CHECK(s.post("/v1/mode", {{"mode", "wizard"}}).second["error"] == "no_session");
  CHECK(s.post("/v1/note", {{"text", "x"}}).first == 409);

  std::tie(code, body) = s.post("/v1/session/start");
  CHECK(code == 200);
  CHECK(body["running"] == true);
  CHECK(body["session_id"] == "live");

  std::tie(code, body) = s.post("/v1/session/start");
  CHECK(code == 409);
  CHECK(body["error"] == "session_running");
  CHECK(body.contains("message"));

  std::this_thread::sleep_for(150ms);
  std::tie(code, body) = s.get("/v1/session/status");
  CHECK(body["t"].get<int>() >= 2);
  CHECK(body["mode"] == "auto");

  std::tie(code, body) = s.post("/v1/session/stop");
  CHECK(code == 200);
  CHECK(body["finished"] == true);
  CHECK(s.post("/v1/session/stop").second["error"] == "session_finished");
  CHECK(s.post("/v1/nudge").second["error"] == "session_finished");

  // A new session may start after the previous one finished.
  std::tie(code, body) = s.post("/v1/session/start", {{"session_id", "second"}});
  CHECK(code == 200);
  CHECK(body["session_id"] == "second");
  s.daemon.stop();
}

TEST_CASE("bad requests") {
  Served s(fast_base());
  CHECK(s.post("/v1/session/start", {{"mode", "bogus"}}).first == 400);
  CHECK(s.post("/v1/session/start", {{"no_such_key", 1}}).first == 400);
  auto res = s.http->Post("/v1/session/start", "not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  REQUIRE(s.post("/v1/session/start").first == 200);
  CHECK(s.post("/v1/mode", {{"mode", "manual"}}).first == 400);
  CHECK(s.post("/v1/mode", json::object()).first == 400);
  CHECK(s.post("/v1/nudge", {{"colour", "red"}}).first == 400);
  CHECK(s.post("/v1/nudge", {{"segment", -1}}).first == 400);
  CHECK(s.post("/v1/note", json::object()).first == 400);
  auto [code, body] = s.post("/v1/nudge", {{"genre", "NotAGenre"}});
  CHECK(code == 422);
  s.daemon.stop();
}

TEST_CASE("control sessions refuse nudges") {
  json base = fast_base();
  base["arm"] = "control";
  Served s(base);
  REQUIRE(s.post("/v1/session/start").first == 200);
  auto [code, body] = s.post("/v1/nudge", {{"genre", "Comedy"}});
  CHECK(code == 409);
  CHECK(body["error"] == "control_arm");
  s.daemon.stop();
}

TEST_CASE("event stream delivers consecutive ticks") {
  Served s(fast_base(20));
  std::vector<SseEvent> events;
  std::thread reader([&] {
    events = read_events(s.daemon.port(), [](const std::vector<SseEvent>& evs) {
      std::size_t ticks = 0;
      for (const auto& e : evs) ticks += e.event == "tick";
      return ticks >= 10;
    });
  });
  std::this_thread::sleep_for(200ms);  // let the stream subscribe
  REQUIRE(s.post("/v1/session/start").first == 200);
  reader.join();
  std::vector<json> ticks;
  for (const auto& e : events) {
    if (e.event == "tick") ticks.push_back(e.data);
  }
  REQUIRE(ticks.size() >= 10);
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    CHECK(ticks[i]["t"] == static_cast<int>(i));
    CHECK(ticks[i].contains("score"));
    CHECK(ticks[i].contains("speech"));
    CHECK(ticks[i].contains("light"));
  }
  s.daemon.stop();
}

TEST_CASE("wizard nudge lands on the promised tick") {
  Served s(fast_base(50));
  std::vector<SseEvent> events;
  std::atomic<Second> target{-1};
  std::thread reader([&] {
    events = read_events(s.daemon.port(), [&](const std::vector<SseEvent>& evs) {
      const auto& d = evs.back().data;
      return target >= 0 && evs.back().event == "tick" && d["t"].template get<Second>() >= target + 2;
    });
  });
  std::this_thread::sleep_for(200ms);
  REQUIRE(s.post("/v1/session/start").first == 200);
  std::this_thread::sleep_for(300ms);

  auto [code, body] = s.post("/v1/nudge", {{"genre", "Comedy"}});
  REQUIRE(code == 202);
  CHECK(body["queued"] == true);
  const Second at = body["applies_at"].get<Second>();
  // A second nudge for the same tick is rate limited, unless the first one
  // already played in the meantime.
  auto [code2, body2] = s.post("/v1/nudge", {{"genre", "Horror"}});
  if (code2 == 429) {
    CHECK(body2["error"] == "rate_limited");
  } else {
    CHECK(code2 == 202);
    CHECK(body2["applies_at"].get<Second>() > at);
  }
  target = at;
  auto [ncode, note] = s.post("/v1/note", {{"text", "they laughed"}});
  CHECK(ncode == 202);
  reader.join();

  bool found = false;
  for (const auto& e : events) {
    if (e.event != "tick" || e.data["t"] != at) continue;
    found = true;
    CHECK(e.data["speech"] == "-");
    REQUIRE(e.data.contains("action"));
    bool wizard_play = false;
    for (const auto& a : e.data["action"]) {
      wizard_play |= a["kind"] == "PlayAudio" && a["source"] == "wizard";
    }
    CHECK(wizard_play);
  }
  CHECK(found);
  s.daemon.stop();
}

TEST_CASE("wizard mode: a silent minute brings no automatic audio") {
  json base = fast_base(10, 400);
  base["simulate"]["profile"] = silent_dyad();
  Served s(base);
  std::vector<SseEvent> events;
  std::thread reader([&] {
    events = read_events(s.daemon.port(),
                         [](const std::vector<SseEvent>& evs) { return evs.back().event == "end"; });
  });
  std::this_thread::sleep_for(200ms);
  REQUIRE(s.post("/v1/session/start").first == 200);
  auto [code, body] = s.post("/v1/mode", {{"mode", "wizard"}});
  CHECK(code == 202);
  CHECK(body["mode"] == "wizard");
  const Second at = body["applies_at"].get<Second>();
  CHECK(at < 100);
  reader.join();

  std::size_t ticks = 0, auto_plays = 0, lights = 0;
  for (const auto& e : events) {
    if (e.event != "tick") continue;
    ++ticks;
    for (const auto& a : e.data.value("action", json::array())) {
      auto_plays += a["kind"] == "PlayAudio";
      lights += a["kind"] == "LightOn";
    }
  }
  CHECK(ticks == 400);
  CHECK(auto_plays == 0);
  CHECK(lights == 1);
  REQUIRE(events.back().event == "end");
  CHECK(events.back().data["mode"] == "wizard");
  CHECK(events.back().data["finished"] == true);
  s.daemon.stop();
}

TEST_CASE("stopping the daemon ends open streams") {
  Served s(fast_base());
  std::thread reader([&] { read_events(s.daemon.port(), [](const std::vector<SseEvent>&) { return false; }); });
  std::this_thread::sleep_for(200ms);
  REQUIRE(s.post("/v1/session/start").first == 200);
  std::this_thread::sleep_for(100ms);
  const auto start = std::chrono::steady_clock::now();
  s.daemon.stop();
  reader.join();
  CHECK(std::chrono::steady_clock::now() - start < 5s);
}
