#include <fstream>

#include "doctest.h"
#include "nudge/session.hpp"
#include "nudge/sim.hpp"
#include "support.hpp"

using namespace nudge;
using namespace nudge::testing;

namespace {

SessionConfig replay_config(const std::filesystem::path& trace) {
  SessionConfig cfg;
  cfg.mode = RunMode::Replay;
  cfg.trace = trace;
  return cfg;
}

std::filesystem::path write_trace(const TempDir& dir, std::string_view bits) {
  const auto path = dir.path / "trace.csv";
  std::ofstream out(path);
  out << "t,label\n";
  for (std::size_t i = 0; i < bits.size(); ++i) {
    out << i << ',' << (bits[i] == '1' ? "TRUE" : "FALSE") << '\n';
  }
  return path;
}

std::vector<std::pair<Second, ActionKind>> collect(Session& s) {
  auto out = std::make_shared<std::vector<std::pair<Second, ActionKind>>>();
  s.add_listener([out](const TickEvent& ev) {
    for (const auto& a : ev.actions) out->emplace_back(a.t, a.kind);
  });
  s.run();
  return *out;
}

// Emits a wrong second after a few good ones.
struct BrokenDetector : Detector {
  Second t = 0;
  std::optional<ClassifiedSecond> next() override {
    const Second now = t < 5 ? t : t + 3;
    ++t;
    return ClassifiedSecond{now, SpeechLabel::Speech, 1.0};
  }
};

}  // namespace

TEST_CASE("replaying the published excerpt reproduces its speech and intervention columns") {
  auto cfg = replay_config(data_path("fixtures/excerpt.csv"));
  cfg.start_time = parse_time("2022-11-15 11:54:08");
  cfg.score.basis = LullBasis::Silence;
  cfg.score.lull_duration_s = 5;
  auto session = make_session(cfg);
  const auto events = collect(*session);
  const auto& log = session->log();

  const auto published = from_csv(read_text_file(data_path("fixtures/excerpt.csv")));
  REQUIRE(log.size() == published.size());
  const std::vector<int> scores{100, 100, 67, 50, 40, 33, 29, 38, 44};
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& got = log.records()[i];
    const auto& want = published.records()[i];
    CHECK(got.time == want.time);
    CHECK(got.speech == want.speech);
    CHECK(got.intervention == want.intervention);
    CHECK(got.score == scores[i]);
  }
  const std::vector<std::pair<Second, ActionKind>> expected{
      {6, ActionKind::LightOn}, {6, ActionKind::PlayAudio}, {7, ActionKind::LightOff}};
  CHECK(events == expected);
}

TEST_CASE("score-basis lull on an extended excerpt") {
  TempDir dir("session");
  auto cfg = replay_config(write_trace(dir, "11000001100000000000"));
  cfg.score.lull_duration_s = 5;
  auto session = make_session(cfg);
  const auto events = collect(*session);
  std::vector<int> scores;
  for (const auto& r : session->log().records()) scores.push_back(r.score);
  CHECK(scores == std::vector<int>{100, 100, 67, 50, 40, 33, 29, 38, 44, 40, 36, 33, 31, 29,
                                   27, 25, 24, 22, 21, 20});
  const std::vector<std::pair<Second, ActionKind>> expected{{6, ActionKind::LightOn},
                                                            {7, ActionKind::LightOff},
                                                            {13, ActionKind::LightOn},
                                                            {17, ActionKind::PlayAudio}};
  CHECK(events == expected);
  CHECK(session->log().records()[17].speech == SpeechCell::None);
}

TEST_CASE("silent dyad: three nudges, back-off, give-up, light stays on") {
  auto cfg = load_session_config(data_path("configs/unresponsive.json"));
  cfg.dyad = {0.0, 0.0, 0.0, 0.0, 10};
  cfg.out_dir.reset();
  auto session = make_session(cfg);
  std::vector<TickEvent> ticks;
  session->add_listener([&](const TickEvent& ev) { ticks.push_back(ev); });
  session->run();
  REQUIRE(ticks.size() == 3600);

  std::vector<Second> plays;
  Second gave_up = -1;
  for (const auto& ev : ticks) {
    for (const auto& a : ev.actions) {
      if (a.kind == ActionKind::PlayAudio) plays.push_back(ev.t);
      if (a.kind == ActionKind::GaveUp) gave_up = ev.t;
    }
  }
  CHECK(plays == std::vector<Second>{119, 299, 599});
  CHECK(gave_up == 659);
  const auto& evals = session->evaluations();
  REQUIRE(evals.size() == 3);
  std::vector<Second> gaps;
  for (const auto& e : evals) {
    CHECK_FALSE(e.success);
    gaps.push_back(e.next_eligible_t - (e.nudge_t + cfg.policy.eval_window_s));
  }
  CHECK(gaps == std::vector<Second>{120, 240, 480});
  for (std::size_t t = 0; t < ticks.size(); ++t) REQUIRE(ticks[t].light);
  CHECK(session->status().policy_mode == PolicyMode::LightOnly);
}

TEST_CASE("simulate mode matches the harness") {
  SessionConfig engine;
  engine.duration_s = 1800;
  const auto via_harness =
      simulate_session(preset_profile("responsive"), engine, 21, Group::Experiment);

  SessionConfig cfg = engine;
  cfg.mode = RunMode::Simulate;
  cfg.dyad = preset_profile("responsive");
  cfg.dyad_seed = derive_seed(21, 0);
  cfg.content.seed = derive_seed(21, 1);
  auto session = make_session(cfg);
  CHECK(to_csv(session->run()) == to_csv(via_harness));
}

TEST_CASE("control arm logs only") {
  SessionConfig cfg;
  cfg.mode = RunMode::Simulate;
  cfg.duration_s = 3600;
  cfg.arm = Group::Control;
  cfg.dyad = {0.0, 0.0, 0.0, 0.0, 10};
  cfg.apply_arm();
  auto session = make_session(cfg);
  std::size_t actions = 0;
  session->add_listener([&](const TickEvent& ev) { actions += ev.actions.size(); });
  const auto& log = session->run();
  CHECK(actions == 0);
  for (const auto& r : log.records()) REQUIRE_FALSE(r.intervention);

  SessionConfig c2 = cfg;
  auto live = make_session(c2);
  try {
    live->submit_wizard({});
    FAIL("wizard accepted on a control session");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::State);
  }
}

TEST_CASE("CSV is written as the session runs") {
  TempDir dir("session");
  auto cfg = replay_config(write_trace(dir, std::string(300, '0')));
  cfg.session_id = "streamed";
  cfg.out_dir = dir.path / "out";
  auto session = make_session(cfg);
  const auto csv = dir.path / "out" / "streamed.csv";
  for (int i = 0; i < 10; ++i) REQUIRE(session->tick());
  // Ten rows are on disk before the session ends.
  const auto partial = from_csv(read_text_file(csv));
  CHECK(partial.size() == 10);
  session->add_note({5, "giggling"});
  session->run();
  const auto stored = read_session(csv);
  CHECK(stored.size() == 300);
  CHECK(to_csv(stored) == to_csv(session->log()));
  REQUIRE(stored.metadata.notes.size() == 1);
  CHECK(stored.metadata.notes[0].text == "giggling");
  CHECK(stored.metadata.config == session->log().metadata.config);
}

TEST_CASE("the stored config snapshot reproduces the session") {
  TempDir dir("session");
  auto cfg = replay_config(write_trace(dir, std::string(100, '1') + std::string(400, '0')));
  cfg.session_id = "repro";
  auto first = make_session(cfg);
  const auto log = first->run();
  auto again = make_session(parse_session_config(log.metadata.config));
  CHECK(to_csv(again->run()) == to_csv(log));
}

TEST_CASE("stop mid-session keeps the partial log") {
  SessionConfig cfg;
  cfg.mode = RunMode::Simulate;
  cfg.duration_s = 3600;
  auto session = make_session(cfg);
  session->add_listener([&](const TickEvent& ev) {
    if (ev.t == 99) session->request_stop();
  });
  const auto& log = session->run();
  CHECK(log.size() == 100);
  const auto st = session->status();
  CHECK(st.finished);
  CHECK_FALSE(st.running);
  CHECK(st.t == 99);
  CHECK_FALSE(session->tick());
  CHECK_THROWS_AS(session->set_auto(false), Error);
}

TEST_CASE("detector failure aborts cleanly") {
  SessionConfig cfg;
  cfg.mode = RunMode::Simulate;
  cfg.duration_s = 60;
  Session session(cfg, std::make_unique<BrokenDetector>(), builtin_corpus());
  const auto& log = session.run();
  CHECK(log.size() == 5);
  const auto st = session.status();
  CHECK(st.finished);
  CHECK(st.abort_reason.find("expected t=5") != std::string::npos);
}

TEST_CASE("wizard nudges play on the next tick") {
  TempDir dir("session");
  auto cfg = replay_config(write_trace(dir, std::string(600, '1')));
  auto session = make_session(cfg);
  REQUIRE(session->tick());  // t=0
  session->submit_wizard({"Comedy", {}, {}, {}});
  // Only one nudge may wait for a given second.
  try {
    session->submit_wizard({});
    FAIL("second queued nudge accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Rate);
  }
  std::vector<TickEvent> ticks;
  session->add_listener([&](const TickEvent& ev) { ticks.push_back(ev); });
  REQUIRE(session->tick());  // t=1
  REQUIRE(ticks.size() == 1);
  REQUIRE(ticks[0].actions.size() == 1);
  const auto& a = ticks[0].actions[0];
  CHECK(a.kind == ActionKind::PlayAudio);
  CHECK(a.source == NudgeSource::Wizard);
  CHECK(ticks[0].speech == SpeechCell::None);
  CHECK(session->log().records()[1].intervention);
  CHECK(ticks[0].score == 50);  // masked as silence: 1 of 2 seconds spoken
  CHECK(ticks[0].to_json()["action"][0]["source"] == "wizard");

  CHECK_THROWS_AS(session->submit_wizard({"NotAGenre", {}, {}, {}}), Error);
  CHECK_THROWS_AS(session->submit_wizard({{}, "no-such-item", {}, {}}), Error);
}

TEST_CASE("wizard mode suppresses automatic audio") {
  TempDir dir("session");
  auto cfg = replay_config(write_trace(dir, std::string(900, '0')));
  auto session = make_session(cfg);
  session->set_auto(false);
  std::size_t plays = 0, lights = 0;
  session->add_listener([&](const TickEvent& ev) {
    for (const auto& a : ev.actions) {
      plays += a.kind == ActionKind::PlayAudio;
      lights += a.kind == ActionKind::LightOn;
    }
  });
  session->run();
  CHECK(plays == 0);
  CHECK(lights == 1);
  CHECK_FALSE(session->status().auto_mode);
}

TEST_CASE("realtime pacing") {
  TempDir dir("session");
  auto cfg = replay_config(write_trace(dir, "1111111111"));
  cfg.realtime = true;
  cfg.tick_period_ms = 20;
  auto session = make_session(cfg);
  const auto start = std::chrono::steady_clock::now();
  session->run();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(elapsed >= std::chrono::milliseconds(200));
  CHECK(elapsed < std::chrono::milliseconds(2000));
}

TEST_CASE("status and tick json") {
  SessionConfig cfg;
  cfg.mode = RunMode::Simulate;
  cfg.session_id = "j";
  cfg.duration_s = 5;
  auto session = make_session(cfg);
  auto j = session->status().to_json();
  CHECK(j["running"] == true);
  CHECK(j["t"] == -1);
  CHECK(j["mode"] == "auto");
  CHECK(j["last_action"].is_null());
  nlohmann::json last;
  session->add_listener([&](const TickEvent& ev) { last = ev.to_json(); });
  session->run();
  CHECK(last["t"] == 4);
  CHECK(last.contains("score"));
  CHECK(last.contains("light"));
  CHECK_FALSE(last.contains("action"));
  CHECK(session->status().to_json()["finished"] == true);
}

TEST_CASE("telemetry outage never touches the local log") {
  TempDir dir("session");
  auto cfg = replay_config(write_trace(dir, std::string(600, '1')));
  cfg.session_id = "offline";
  cfg.out_dir = dir.path;
  cfg.telemetry.url = "http://127.0.0.1:9";
  cfg.telemetry.max_attempts = 2;
  cfg.telemetry.retry_base = std::chrono::milliseconds(5);
  cfg.telemetry.request_timeout = std::chrono::milliseconds(200);
  auto session = make_session(cfg);
  const auto& log = session->run();
  CHECK(log.size() == 600);
  CHECK(session->status().telemetry == TelemetryStatus::Degraded);
  CHECK(session->status().to_json()["telemetry"] == "degraded");
  CHECK(read_session(dir.path / "offline.csv").size() == 600);
}

TEST_CASE("telemetry mirrors every record") {
  MockTelemetryServer server("tok");
  server.start();
  server.fail_next(2);
  server.drop_ack_every(5);
  SessionConfig cfg;
  cfg.mode = RunMode::Simulate;
  cfg.duration_s = 3600;
  cfg.session_id = "mirrored";
  cfg.dyad = preset_profile("responsive");
  cfg.telemetry.url = server.url();
  cfg.telemetry.token = "tok";
  cfg.telemetry.retry_base = std::chrono::milliseconds(5);
  auto session = make_session(cfg);
  const auto& log = session->run();
  CHECK(session->status().telemetry == TelemetryStatus::Ok);
  const auto stored = server.records("mirrored");
  REQUIRE(stored.size() == 3600);
  for (std::size_t i = 0; i < stored.size(); ++i) {
    REQUIRE(stored[i]["score"] == log.records()[i].score);
    REQUIRE(stored[i]["intervention"] == log.records()[i].intervention);
  }
  CHECK(server.unique_batches() == 60);
}
