#include "nudge/config.hpp"

#include <initializer_list>

#include "builtin_corpus.hpp"

namespace nudge {

namespace fs = std::filesystem;

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Live: return "live";
    case RunMode::Replay: return "replay";
    case RunMode::Simulate: return "simulate";
  }
  return "?";
}

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Config, where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw Error(ErrorKind::Config, where + ": unknown key '" + key + "'");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

std::optional<double> opt_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

ScoreConfig score_config_from_json(const nlohmann::json& j, ScoreConfig c) {
  check_keys(j, {"window_s", "lull_threshold", "lull_duration_s", "lull_basis"}, "score");
  c.window_s = j.value("window_s", c.window_s);
  c.lull_threshold = j.value("lull_threshold", c.lull_threshold);
  c.lull_duration_s = j.value("lull_duration_s", c.lull_duration_s);
  if (j.contains("lull_basis")) {
    const auto b = j["lull_basis"].get<std::string>();
    if (b == "score") {
      c.basis = LullBasis::Score;
    } else if (b == "silence") {
      c.basis = LullBasis::Silence;
    } else {
      throw Error(ErrorKind::Config, "score: lull_basis must be 'score' or 'silence'");
    }
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ScoreConfig& c) {
  return {{"window_s", c.window_s},
          {"lull_threshold", c.lull_threshold},
          {"lull_duration_s", c.lull_duration_s},
          {"lull_basis", c.basis == LullBasis::Score ? "score" : "silence"}};
}

PolicyConfig policy_config_from_json(const nlohmann::json& j, PolicyConfig c) {
  check_keys(j,
             {"base_gap_s", "backoff_multiplier", "backoff_additive_s",
              "max_audio_attempts", "eval_window_s", "success_margin", "light_enabled",
              "auto_enabled", "light_hysteresis"},
             "policy");
  c.base_gap_s = j.value("base_gap_s", c.base_gap_s);
  c.backoff_multiplier = j.value("backoff_multiplier", c.backoff_multiplier);
  c.backoff_additive_s = j.value("backoff_additive_s", c.backoff_additive_s);
  c.max_audio_attempts = j.value("max_audio_attempts", c.max_audio_attempts);
  c.eval_window_s = j.value("eval_window_s", c.eval_window_s);
  c.success_margin = j.value("success_margin", c.success_margin);
  c.light_enabled = j.value("light_enabled", c.light_enabled);
  c.auto_enabled = j.value("auto_enabled", c.auto_enabled);
  c.light_hysteresis = j.value("light_hysteresis", c.light_hysteresis);
  c.validate();
  return c;
}

nlohmann::json to_json(const PolicyConfig& c) {
  return {{"base_gap_s", c.base_gap_s},
          {"backoff_multiplier", c.backoff_multiplier},
          {"backoff_additive_s", c.backoff_additive_s},
          {"max_audio_attempts", c.max_audio_attempts},
          {"eval_window_s", c.eval_window_s},
          {"success_margin", c.success_margin},
          {"light_enabled", c.light_enabled},
          {"auto_enabled", c.auto_enabled},
          {"light_hysteresis", c.light_hysteresis}};
}

void SessionConfig::validate() const {
  if (session_id.empty() ||
      session_id.find_first_of("/\\: ") != std::string::npos) {
    throw Error(ErrorKind::Config, "session_id must be non-empty without '/', '\\', ':' or spaces");
  }
  if (mode == RunMode::Replay && !trace) {
    throw Error(ErrorKind::Config, "replay mode requires a trace path");
  }
  if (mode == RunMode::Live && !audio) {
    throw Error(ErrorKind::Config, "live mode requires an audio source");
  }
  if (mode == RunMode::Simulate && duration_s <= 0) {
    throw Error(ErrorKind::Config, "simulate mode requires duration_s >= 1");
  }
  if (duration_s < 0) throw Error(ErrorKind::Config, "duration_s must be >= 0");
  if (tick_period_ms < 1) throw Error(ErrorKind::Config, "tick_period_ms must be >= 1");
  detector.validate();
  score.validate();
  policy.validate();
  telemetry.validate();
  dyad.validate();
}

void SessionConfig::apply_arm() {
  if (arm == Group::Control) {
    policy.light_enabled = false;
    policy.auto_enabled = false;
  }
}

SessionConfig parse_session_config(const nlohmann::json& j, const fs::path& base_dir) {
  SessionConfig c;
  try {
    check_keys(j,
               {"mode", "session_id", "arm", "trace", "audio", "duration_s", "start_time",
                "realtime", "tick_period_ms", "detector", "score", "policy", "content",
                "telemetry", "participants", "simulate", "out_dir"},
               "config");
    if (j.contains("mode")) {
      const auto m = j["mode"].get<std::string>();
      if (m == "live") {
        c.mode = RunMode::Live;
      } else if (m == "replay") {
        c.mode = RunMode::Replay;
      } else if (m == "simulate") {
        c.mode = RunMode::Simulate;
      } else {
        throw Error(ErrorKind::Config, "config: mode must be live, replay or simulate");
      }
    }
    c.realtime = c.mode == RunMode::Live;
    c.session_id = j.value("session_id", c.session_id);
    if (j.contains("arm")) c.arm = parse_group(j["arm"].get<std::string>());
    if (j.contains("trace")) c.trace = resolve(base_dir, j["trace"].get<std::string>());
    if (j.contains("audio")) c.audio = resolve(base_dir, j["audio"].get<std::string>());
    c.duration_s = j.value("duration_s", c.duration_s);
    if (j.contains("start_time")) c.start_time = parse_time(j["start_time"].get<std::string>());
    c.realtime = j.value("realtime", c.realtime);
    c.tick_period_ms = j.value("tick_period_ms", c.tick_period_ms);

    if (j.contains("detector")) {
      check_keys(j["detector"], {"rms_threshold"}, "detector");
      c.detector.rms_threshold = j["detector"].value("rms_threshold", c.detector.rms_threshold);
    }
    if (j.contains("score")) c.score = score_config_from_json(j["score"]);
    if (j.contains("policy")) c.policy = policy_config_from_json(j["policy"]);

    if (j.contains("content")) {
      const auto& cj = j["content"];
      check_keys(cj, {"corpus", "stories", "mode", "preferred_genres", "genre_token", "seed"},
                 "content");
      // "builtin" (what to_json writes) selects the compiled-in fixture.
      auto corpus_path = [&](const char* key) -> std::optional<fs::path> {
        if (!cj.contains(key) || cj[key].is_null()) return std::nullopt;
        const auto v = cj[key].get<std::string>();
        if (v == "builtin") return std::nullopt;
        return resolve(base_dir, v);
      };
      c.content.corpus = corpus_path("corpus");
      c.content.stories = corpus_path("stories");
      if (cj.contains("mode")) {
        const auto m = cj["mode"].get<std::string>();
        if (m == "facts") {
          c.content.mode = ContentMode::Facts;
        } else if (m == "stories") {
          c.content.mode = ContentMode::Stories;
        } else {
          throw Error(ErrorKind::Config, "content: mode must be 'facts' or 'stories'");
        }
      }
      if (cj.contains("preferred_genres")) {
        const auto genres = cj["preferred_genres"].get<std::vector<std::string>>();
        c.content.preferred_genres = {genres.begin(), genres.end()};
      }
      if (cj.contains("genre_token") && !cj["genre_token"].is_null()) {
        c.content.genre_token = cj["genre_token"].get<std::string>();
      }
      c.content.seed = cj.value("seed", c.content.seed);
    }

    if (j.contains("telemetry")) {
      const auto& tj = j["telemetry"];
      // token_set is informational (written into snapshots in place of the token).
      check_keys(tj, {"url", "token", "token_set", "batch_size", "max_attempts", "retry_base_ms"},
                 "telemetry");
      c.telemetry.url = tj.value("url", c.telemetry.url);
      c.telemetry.token = tj.value("token", c.telemetry.token);
      c.telemetry.batch_size = tj.value("batch_size", c.telemetry.batch_size);
      c.telemetry.max_attempts = tj.value("max_attempts", c.telemetry.max_attempts);
      if (tj.contains("retry_base_ms")) {
        c.telemetry.retry_base = std::chrono::milliseconds(tj["retry_base_ms"].get<int>());
      }
    }
    c.telemetry.apply_env();

    if (j.contains("participants")) {
      const auto& pj = j["participants"];
      check_keys(pj, {"friendship_duration", "intimacy_pre", "intimacy_post"}, "participants");
      c.participants.friendship_duration = opt_number(pj, "friendship_duration");
      c.participants.intimacy_pre = opt_number(pj, "intimacy_pre");
      c.participants.intimacy_post = opt_number(pj, "intimacy_post");
    }
    if (j.contains("simulate")) {
      const auto& sj = j["simulate"];
      check_keys(sj, {"profile", "seed"}, "simulate");
      if (sj.contains("profile")) c.dyad = dyad_profile_from_json(sj["profile"]);
      c.dyad_seed = sj.value("seed", c.dyad_seed);
    }
    if (j.contains("out_dir")) c.out_dir = resolve(base_dir, j["out_dir"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, e.what());
  }
  c.apply_arm();
  c.validate();
  return c;
}

SessionConfig load_session_config(const fs::path& path) {
  const auto j = read_json_file(path);
  return parse_session_config(j, path.parent_path());
}

nlohmann::json to_json(const SessionConfig& c) {
  nlohmann::json j;
  j["mode"] = to_string(c.mode);
  j["session_id"] = c.session_id;
  j["arm"] = to_string(c.arm);
  if (c.trace) j["trace"] = c.trace->string();
  if (c.audio) j["audio"] = c.audio->string();
  j["duration_s"] = c.duration_s;
  j["start_time"] = format_time(c.start_time);
  j["realtime"] = c.realtime;
  j["tick_period_ms"] = c.tick_period_ms;
  j["detector"] = {{"rms_threshold", c.detector.rms_threshold}};
  j["score"] = to_json(c.score);
  j["policy"] = to_json(c.policy);
  nlohmann::json content;
  content["corpus"] = c.content.corpus ? c.content.corpus->string() : "builtin";
  content["stories"] = c.content.stories ? c.content.stories->string() : "builtin";
  content["mode"] = c.content.mode == ContentMode::Facts ? "facts" : "stories";
  content["preferred_genres"] = c.content.preferred_genres;
  content["genre_token"] = c.content.genre_token ? nlohmann::json(*c.content.genre_token)
                                                 : nlohmann::json(nullptr);
  content["seed"] = c.content.seed;
  j["content"] = content;
  // The token is a credential; the snapshot records only whether one was set.
  j["telemetry"] = {{"url", c.telemetry.url},
                    {"token_set", !c.telemetry.token.empty()},
                    {"batch_size", c.telemetry.batch_size}};
  j["participants"] = {{"friendship_duration", opt_json(c.participants.friendship_duration)},
                       {"intimacy_pre", opt_json(c.participants.intimacy_pre)},
                       {"intimacy_post", opt_json(c.participants.intimacy_post)}};
  if (c.mode == RunMode::Simulate) {
    j["simulate"] = {{"profile", to_json(c.dyad)}, {"seed", c.dyad_seed}};
  }
  return j;
}

const Corpus& builtin_corpus() {
  static const Corpus corpus = [] {
    Corpus c;
    c.items = parse_items(nlohmann::json::parse(detail::kBuiltinCorpusJson));
    c.stories = parse_stories(nlohmann::json::parse(detail::kBuiltinStoriesJson));
    return c;
  }();
  return corpus;
}

Corpus resolve_corpus(const ContentConfig& cfg) {
  Corpus c;
  c.items = cfg.corpus ? parse_items(read_json_file(*cfg.corpus)) : builtin_corpus().items;
  c.stories =
      cfg.stories ? parse_stories(read_json_file(*cfg.stories)) : builtin_corpus().stories;
  return c;
}

}  // namespace nudge
