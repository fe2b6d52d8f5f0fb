#include "nudge/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "nudge/session.hpp"

namespace nudge {

void ExperimentPlan::validate() const {
  if (sessions_per_arm < 1) throw Error(ErrorKind::Config, "plan: sessions_per_arm must be >= 1");
  if (duration_s < 1) throw Error(ErrorKind::Config, "plan: duration_s must be >= 1");
  if (!(friendship_min >= 0.0 && friendship_max >= friendship_min)) {
    throw Error(ErrorKind::Config, "plan: friendship range must satisfy 0 <= min <= max");
  }
  if (!(friendship_effect >= 0.0)) {
    throw Error(ErrorKind::Config, "plan: friendship_effect must be >= 0");
  }
  profile.validate();
  SessionConfig as_run = engine;  // mode and duration are owned by the harness
  as_run.mode = RunMode::Simulate;
  as_run.duration_s = duration_s;
  as_run.validate();
  analytics.validate();
}

ExperimentPlan parse_plan(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ExperimentPlan plan;
  try {
    for (const auto& [key, value] : j.items()) {
      static const std::set<std::string> known = {
          "sessions_per_arm", "duration_s", "seed", "profile", "engine", "analytics",
          "friendship"};
      if (!known.count(key)) throw Error(ErrorKind::Config, "plan: unknown key '" + key + "'");
    }
    plan.sessions_per_arm = j.value("sessions_per_arm", plan.sessions_per_arm);
    plan.duration_s = j.value("duration_s", plan.duration_s);
    plan.seed = j.value("seed", plan.seed);
    if (j.contains("profile")) plan.profile = dyad_profile_from_json(j["profile"]);

    nlohmann::json engine = j.value("engine", nlohmann::json::object());
    for (const char* forbidden : {"mode", "duration_s", "simulate", "trace", "audio", "arm"}) {
      if (engine.contains(forbidden)) {
        throw Error(ErrorKind::Config,
                    std::string("plan: engine.") + forbidden + " is set by the harness");
      }
    }
    engine["mode"] = "simulate";
    engine["duration_s"] = plan.duration_s;
    plan.engine = parse_session_config(engine, base_dir);
    plan.engine.telemetry = TelemetryConfig{};

    plan.analytics.eval_window_s = plan.engine.policy.eval_window_s;
    plan.analytics.success_margin = plan.engine.policy.success_margin;
    if (j.contains("analytics")) {
      const auto& a = j["analytics"];
      for (const auto& [key, value] : a.items()) {
        if (key != "lull_len_s" && key != "eval_window_s" && key != "success_margin") {
          throw Error(ErrorKind::Config, "plan: unknown analytics key '" + key + "'");
        }
      }
      plan.analytics.lull_len_s = a.value("lull_len_s", plan.analytics.lull_len_s);
      plan.analytics.eval_window_s = a.value("eval_window_s", plan.analytics.eval_window_s);
      plan.analytics.success_margin = a.value("success_margin", plan.analytics.success_margin);
    }
    if (j.contains("friendship")) {
      const auto& f = j["friendship"];
      plan.friendship_min = f.value("min", plan.friendship_min);
      plan.friendship_max = f.value("max", plan.friendship_max);
      plan.friendship_effect = f.value("effect", plan.friendship_effect);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_json_file(path), path.parent_path());
}

nlohmann::json to_json(const ExperimentPlan& plan) {
  auto engine = to_json(plan.engine);
  for (const char* k : {"mode", "duration_s", "arm", "session_id", "realtime",
                        "tick_period_ms", "telemetry", "participants", "simulate"}) {
    engine.erase(k);
  }
  return {{"sessions_per_arm", plan.sessions_per_arm},
          {"duration_s", plan.duration_s},
          {"seed", plan.seed},
          {"profile", to_json(plan.profile)},
          {"engine", engine},
          {"analytics",
           {{"lull_len_s", plan.analytics.lull_len_s},
            {"eval_window_s", plan.analytics.eval_window_s},
            {"success_margin", plan.analytics.success_margin}}},
          {"friendship",
           {{"min", plan.friendship_min},
            {"max", plan.friendship_max},
            {"effect", plan.friendship_effect}}}};
}

SessionLog simulate_session(const DyadProfile& profile, const SessionConfig& engine,
                            std::uint64_t seed, Group arm) {
  SessionConfig cfg = engine;
  cfg.mode = RunMode::Simulate;
  cfg.arm = arm;
  cfg.dyad = profile;
  cfg.dyad_seed = derive_seed(seed, 0);
  cfg.content.seed = derive_seed(seed, 1);
  cfg.realtime = false;
  cfg.out_dir.reset();
  cfg.telemetry = TelemetryConfig{};
  cfg.apply_arm();
  auto session = make_session(cfg);
  return session->run();
}

namespace {

std::string session_name(Group arm, std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s-%02zu", arm == Group::Control ? "control" : "experiment",
                i + 1);
  return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  ExperimentResult result;
  const Second max_nudges =
      plan.duration_s / (plan.engine.policy.eval_window_s + plan.engine.policy.base_gap_s) + 1;

  for (Group arm : {Group::Control, Group::Experiment}) {
    for (std::size_t i = 0; i < plan.sessions_per_arm; ++i) {
      const std::uint64_t seed = derive_seed(plan.seed, i);
      Rng meta_rng(derive_seed(seed, 2));
      const double years = plan.friendship_min +
                           (plan.friendship_max - plan.friendship_min) * meta_rng.uniform01();
      const double intimacy_pre = 3.0 + static_cast<double>(meta_rng.uniform_index(6));
      const double lift = meta_rng.uniform01();

      DyadProfile profile = plan.profile;
      profile.p_resume_talk /= 1.0 + plan.friendship_effect * years;

      SessionConfig engine = plan.engine;
      engine.session_id = session_name(arm, i);
      engine.duration_s = plan.duration_s;
      engine.participants.friendship_duration = years;
      engine.participants.intimacy_pre = intimacy_pre;

      SessionLog log = simulate_session(profile, engine, seed, arm);
      const auto metrics = session_metrics(log, plan.analytics);
      const double intimacy_post =
          std::min(10.0, intimacy_pre + (lift < metrics.speech_ratio ? 1.0 : 0.0));
      log.metadata.intimacy_post = intimacy_post;

      if (static_cast<Second>(metrics.nudge_count) > max_nudges) {
        result.warnings.push_back(log.session_id + ": " + std::to_string(metrics.nudge_count) +
                                  " nudges exceeds the back-off bound of " +
                                  std::to_string(max_nudges));
      }
      result.meta.push_back({log.session_id, arm, years, intimacy_pre, intimacy_post});
      result.logs.push_back(std::move(log));
    }
  }

  result.report = cohort_report(result.logs, plan.analytics);
  const auto groups = result.report.groups.find("experiment");
  if (groups != result.report.groups.end() &&
      groups->second.at("nudge_count").mean == 0.0) {
    result.warnings.push_back("experiment arm played no nudges; the profile never lulled");
  }
  return result;
}

void write_experiment(const ExperimentResult& result, const ExperimentPlan& plan,
                      const std::filesystem::path& out_dir) {
  const auto sessions = out_dir / "sessions";
  std::filesystem::create_directories(sessions);
  for (const auto& log : result.logs) write_session(sessions, log);
  write_text_file(out_dir / "cohort_meta.csv", cohort_meta_csv(result.meta));
  auto report = result.report.to_json();
  report["warnings"] = result.warnings;
  write_text_file(out_dir / "report.json", report.dump(2) + "\n");
  write_text_file(out_dir / "session_metrics.csv", result.report.sessions_csv());
  write_text_file(out_dir / "plan.json", to_json(plan).dump(2) + "\n");
}

}  // namespace nudge
