#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nudge/error.hpp"

namespace nudge {

/// Zone-less civil time at one-second resolution.
using WallTime = std::chrono::sys_seconds;

/// "YYYY-MM-DD HH:MM:SS"
std::string format_time(WallTime time);
/// Strict inverse of format_time; throws ErrorKind::Input.
WallTime parse_time(std::string_view text);

/// Speech column: TRUE, FALSE, or "-" on intervention rows.
enum class SpeechCell { True, False, None };

struct SessionRecord {
  WallTime time{};
  int score = 0;
  SpeechCell speech = SpeechCell::False;
  bool intervention = false;

  /// speech == None iff intervention, score in [0, 100].
  void validate() const;
  bool operator==(const SessionRecord&) const = default;
};

enum class Group { Control, Experiment };

std::string_view to_string(Group group);
Group parse_group(std::string_view text);

struct Note {
  Second t = 0;
  std::string text;

  bool operator==(const Note&) const = default;
};

struct SessionMetadata {
  std::optional<double> friendship_duration;  // years
  std::optional<double> intimacy_pre;         // 0..10
  std::optional<double> intimacy_post;        // 0..10
  std::vector<std::string> preferred_genres;
  nlohmann::json config;  // resolved config snapshot
  std::vector<Note> notes;

  bool operator==(const SessionMetadata&) const = default;
};

class SessionLog {
public:
  std::string session_id;
  Group group = Group::Experiment;
  SessionMetadata metadata;

  /// Appends a record exactly one second after the last one. Throws
  /// ErrorKind::Sequencing on gaps or duplicates and ErrorKind::Input on an
  /// invalid record.
  void append(const SessionRecord& record);

  const std::vector<SessionRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  bool operator==(const SessionLog&) const = default;

private:
  std::vector<SessionRecord> records_;
};

inline constexpr std::string_view kCsvHeader =
    "Time,Amount of Conversation,Speech,Intervention";

/// One data row without the line terminator.
std::string csv_row(const SessionRecord& record);
std::string to_csv(const SessionLog& log);
/// Parses the four-column session CSV. Metadata is left default. Errors are
/// ParseError carrying the line number.
SessionLog from_csv(std::string_view text);

nlohmann::json metadata_to_json(const SessionLog& log);
void apply_metadata_json(SessionLog& log, const nlohmann::json& j);

/// Writes <dir>/<session_id>.csv and <dir>/<session_id>.meta.json. The log
/// must carry a config snapshot.
void write_session(const std::filesystem::path& dir, const SessionLog& log);
/// Reads a session CSV; picks up the .meta.json sidecar when present. The
/// session id defaults to the file stem.
SessionLog read_session(const std::filesystem::path& csv_path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace nudge
