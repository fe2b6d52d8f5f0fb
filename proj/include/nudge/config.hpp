#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "nudge/content.hpp"
#include "nudge/detect.hpp"
#include "nudge/dyad.hpp"
#include "nudge/policy.hpp"
#include "nudge/score.hpp"
#include "nudge/sessionlog.hpp"
#include "nudge/telemetry.hpp"

namespace nudge {

enum class RunMode { Live, Replay, Simulate };

std::string_view to_string(RunMode mode);

struct ContentConfig {
  std::optional<std::filesystem::path> corpus;   // built-in fixture if empty
  std::optional<std::filesystem::path> stories;  // built-in fixture if empty
  ContentMode mode = ContentMode::Facts;
  std::set<std::string> preferred_genres;        // empty: all genres
  std::optional<std::string> genre_token;
  std::uint64_t seed = 0;
};

struct ParticipantMeta {
  std::optional<double> friendship_duration;
  std::optional<double> intimacy_pre;
  std::optional<double> intimacy_post;
};

// Everything a session needs. Serialized back out (to_json) as the snapshot
// embedded in every session log.
struct SessionConfig {
  RunMode mode = RunMode::Replay;
  std::string session_id = "session";
  Group arm = Group::Experiment;
  std::optional<std::filesystem::path> trace;  // replay
  std::optional<std::filesystem::path> audio;  // live: mono 16-bit WAV
  Second duration_s = 0;                       // 0: until the input ends
  WallTime start_time = parse_time("2024-01-01 10:00:00");
  bool realtime = false;                       // pace ticks on the wall clock
  int tick_period_ms = 1000;

  DetectorConfig detector;
  ScoreConfig score;
  PolicyConfig policy;
  ContentConfig content;
  TelemetryConfig telemetry;
  ParticipantMeta participants;

  DyadProfile dyad;
  std::uint64_t dyad_seed = 0;

  std::optional<std::filesystem::path> out_dir;

  /// Cross-field checks; throws ErrorKind::Config.
  void validate() const;
  /// Control sessions only log: light and auto audio are forced off.
  void apply_arm();
};

/// Relative paths resolve against base_dir. Unknown keys are rejected.
SessionConfig parse_session_config(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir = {});
SessionConfig load_session_config(const std::filesystem::path& path);
nlohmann::json to_json(const SessionConfig& cfg);

ScoreConfig score_config_from_json(const nlohmann::json& j, ScoreConfig base = {});
PolicyConfig policy_config_from_json(const nlohmann::json& j, PolicyConfig base = {});
nlohmann::json to_json(const ScoreConfig& cfg);
nlohmann::json to_json(const PolicyConfig& cfg);

/// Fixture corpus compiled into the library.
const Corpus& builtin_corpus();
/// Loads the configured corpus, falling back to the built-in fixture.
Corpus resolve_corpus(const ContentConfig& cfg);

}  // namespace nudge
