#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nudge/error.hpp"
#include "nudge/rng.hpp"
#include "json.hpp"

namespace nudge {

enum class FactType { Popularity, Example, ActorActress, FunFact, Platform, Theme };

inline constexpr std::size_t kFactTypeCount = 6;

std::string_view to_string(FactType type);
std::optional<FactType> parse_fact_type(std::string_view label);

/// Closed genre set for fact nudges. Only Adventure is attested by the
/// original sentence table; the other seven are stand-ins.
std::span<const std::string_view> fact_genres();
/// Closed genre set for narrative stories.
std::span<const std::string_view> story_genres();

struct NudgeItem {
  std::string id;
  std::string genre;
  FactType type = FactType::Popularity;
  std::string text;
  std::string audio_ref;
  std::string voice;

  bool operator==(const NudgeItem&) const = default;
};

struct Story {
  std::string id;
  std::string genre;
  std::string plot;
  std::vector<std::string> segments;  // ~30 s each, played in order
};

struct Corpus {
  std::vector<NudgeItem> items;
  std::vector<Story> stories;

  const NudgeItem* find_item(std::string_view id) const;
  const Story* find_story(std::string_view id) const;
};

struct CorpusReport {
  std::vector<std::string> errors;
  std::size_t item_count = 0;
  std::set<std::string> genres;
  std::set<std::string> types;
  std::size_t story_count = 0;

  bool ok() const { return errors.empty(); }
};

// Loaders validate closed sets and uniqueness and throw ErrorKind::Parse
// naming the offending entry. check_* collect every problem instead.
std::vector<NudgeItem> parse_items(const nlohmann::json& doc);
std::vector<Story> parse_stories(const nlohmann::json& doc);
CorpusReport check_items(const nlohmann::json& doc);
CorpusReport check_stories(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& items_path,
                   const std::optional<std::filesystem::path>& stories_path);

using PlayedIds = std::set<std::string>;

/// Uniform choice among items whose genre is preferred and whose id has not
/// been played. Throws ErrorKind::NoContent when nothing is eligible.
const NudgeItem& select_fact(std::span<const NudgeItem> items,
                             const std::set<std::string>& preferred_genres,
                             const PlayedIds& history, Rng& rng);

/// Throws ErrorKind::StoryExhausted when cursor is past the last segment.
const std::string& next_segment(const Story& story, std::size_t cursor);

/// Token genre if given (ErrorKind::UnknownGenre if no story carries it),
/// otherwise a uniform draw over the distinct story genres.
std::string genre_for_session(const std::optional<std::string>& token,
                              std::span<const Story> stories, Rng& rng);

/// Something the device can play: a fact sentence or a story segment.
struct NudgeRef {
  std::string id;
  std::string text;       // rendered onto the event stream in text-only mode
  std::string audio_ref;
};

/// Operator request; any combination may be empty.
struct WizardRequest {
  std::optional<std::string> genre;
  std::optional<std::string> item_id;
  std::optional<std::string> story_id;
  std::optional<std::size_t> segment;
};

enum class ContentMode { Facts, Stories };

// Per-session content state: the played-id history, story cursors and the rng.
// History is never reset implicitly; exhaustion surfaces as NoContent.
class SessionContent {
public:
  SessionContent(const Corpus& corpus, ContentMode mode,
                 std::set<std::string> preferred_genres,
                 std::optional<std::string> genre_token, std::uint64_t seed);

  /// Next automatic nudge, or nullopt when the session's content is used up.
  std::optional<NudgeRef> next_auto();

  /// Resolves an operator request. Throws NoContent / StoryExhausted /
  /// UnknownGenre / Input on bad requests.
  NudgeRef next_wizard(const WizardRequest& req);

  /// Read-only check of what next_wizard would do; throws the same errors.
  void check_wizard(const WizardRequest& req) const;

  void reset_history() { history_.clear(); }

  const PlayedIds& history() const { return history_; }
  const Story* active_story() const { return active_story_; }
  std::size_t cursor(const std::string& story_id) const;
  ContentMode mode() const { return mode_; }

private:
  NudgeRef play_item(const NudgeItem& item);
  NudgeRef play_segment(const Story& story);
  const Story& story_for_genre(const std::string& genre) const;

  const Corpus& corpus_;
  ContentMode mode_;
  std::set<std::string> preferred_;
  Rng rng_;
  PlayedIds history_;
  const Story* active_story_ = nullptr;
  std::map<std::string, std::size_t> cursors_;
};

}  // namespace nudge
