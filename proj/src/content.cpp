#include "nudge/content.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <tuple>

namespace nudge {

namespace {

constexpr std::array<std::string_view, 8> kFactGenres = {
    "Adventure", "Animation", "Comedy",  "Crime",
    "Drama",     "Horror",    "Romance", "Science Fiction"};

constexpr std::array<std::string_view, 6> kStoryGenres = {
    "Fantasy", "Tragedy", "Romance", "Sci-fi", "Crime", "Comedy"};

constexpr std::array<std::string_view, kFactTypeCount> kTypeLabels = {
    "Popularity", "Example", "Actor/Actress", "Fun fact", "Platform", "Theme"};

bool contains(std::span<const std::string_view> set, std::string_view v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

std::string entry_name(const nlohmann::json& e, std::size_t index) {
  if (e.is_object() && e.contains("id") && e["id"].is_string()) {
    return "entry " + std::to_string(index) + " (id '" +
           e["id"].get<std::string>() + "')";
  }
  return "entry " + std::to_string(index);
}

std::optional<std::string> string_field(const nlohmann::json& e,
                                        const char* key) {
  if (!e.contains(key) || !e[key].is_string()) return std::nullopt;
  return e[key].get<std::string>();
}

}  // namespace

std::string_view to_string(FactType type) {
  return kTypeLabels[static_cast<std::size_t>(type)];
}

std::optional<FactType> parse_fact_type(std::string_view label) {
  for (std::size_t i = 0; i < kTypeLabels.size(); ++i) {
    if (kTypeLabels[i] == label) return static_cast<FactType>(i);
  }
  return std::nullopt;
}

std::span<const std::string_view> fact_genres() { return kFactGenres; }
std::span<const std::string_view> story_genres() { return kStoryGenres; }

const NudgeItem* Corpus::find_item(std::string_view id) const {
  for (const auto& it : items) {
    if (it.id == id) return &it;
  }
  return nullptr;
}

const Story* Corpus::find_story(std::string_view id) const {
  for (const auto& s : stories) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

CorpusReport check_items(const nlohmann::json& doc) {
  CorpusReport report;
  if (!doc.is_array()) {
    report.errors.push_back("corpus must be a JSON array");
    return report;
  }
  std::set<std::string> ids;
  std::set<std::tuple<std::string, std::string, std::string>> keys;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const std::string where = entry_name(e, i);
    if (!e.is_object()) {
      report.errors.push_back(where + ": not an object");
      continue;
    }
    const auto id = string_field(e, "id");
    const auto genre = string_field(e, "genre");
    const auto type = string_field(e, "type");
    const auto text = string_field(e, "text");
    if (!id || id->empty()) report.errors.push_back(where + ": missing id");
    if (!genre) report.errors.push_back(where + ": missing genre");
    if (!type) report.errors.push_back(where + ": missing type");
    if (!text || text->empty()) report.errors.push_back(where + ": missing text");
    for (const char* opt : {"audio_ref", "voice"}) {
      if (e.contains(opt) && !e[opt].is_string()) {
        report.errors.push_back(where + ": " + opt + " must be a string");
      }
    }
    if (id && !ids.insert(*id).second) {
      report.errors.push_back(where + ": duplicate id");
    }
    if (genre && !contains(kFactGenres, *genre)) {
      report.errors.push_back(where + ": unknown genre '" + *genre + "'");
    }
    if (type && !parse_fact_type(*type)) {
      report.errors.push_back(where + ": unknown type '" + *type + "'");
    }
    if (genre && type && text && !keys.emplace(*genre, *type, *text).second) {
      report.errors.push_back(where + ": duplicate (genre, type, text)");
    }
    if (genre) report.genres.insert(*genre);
    if (type) report.types.insert(*type);
    ++report.item_count;
  }
  return report;
}

CorpusReport check_stories(const nlohmann::json& doc) {
  CorpusReport report;
  if (!doc.is_array()) {
    report.errors.push_back("stories file must be a JSON array");
    return report;
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const std::string where = "story " + entry_name(e, i);
    if (!e.is_object()) {
      report.errors.push_back(where + ": not an object");
      continue;
    }
    const auto id = string_field(e, "id");
    const auto genre = string_field(e, "genre");
    if (!id || id->empty()) report.errors.push_back(where + ": missing id");
    if (id && !ids.insert(*id).second) report.errors.push_back(where + ": duplicate id");
    if (!genre) {
      report.errors.push_back(where + ": missing genre");
    } else if (!contains(kStoryGenres, *genre)) {
      report.errors.push_back(where + ": unknown genre '" + *genre + "'");
    } else {
      report.genres.insert(*genre);
    }
    if (!string_field(e, "plot")) report.errors.push_back(where + ": missing plot");
    if (!e.contains("segments") || !e["segments"].is_array() ||
        e["segments"].empty()) {
      report.errors.push_back(where + ": segments must be a non-empty array");
    } else {
      for (const auto& seg : e["segments"]) {
        if (!seg.is_string() || seg.get<std::string>().empty()) {
          report.errors.push_back(where + ": segment refs must be non-empty strings");
          break;
        }
      }
    }
    ++report.story_count;
  }
  return report;
}

std::vector<NudgeItem> parse_items(const nlohmann::json& doc) {
  const auto report = check_items(doc);
  if (!report.ok()) throw Error(ErrorKind::Parse, "corpus: " + report.errors.front());
  std::vector<NudgeItem> items;
  items.reserve(doc.size());
  for (const auto& e : doc) {
    NudgeItem it;
    it.id = e["id"].get<std::string>();
    it.genre = e["genre"].get<std::string>();
    it.type = *parse_fact_type(e["type"].get<std::string>());
    it.text = e["text"].get<std::string>();
    it.audio_ref = e.value("audio_ref", std::string{});
    it.voice = e.value("voice", std::string{});
    items.push_back(std::move(it));
  }
  return items;
}

std::vector<Story> parse_stories(const nlohmann::json& doc) {
  const auto report = check_stories(doc);
  if (!report.ok()) throw Error(ErrorKind::Parse, "stories: " + report.errors.front());
  std::vector<Story> stories;
  stories.reserve(doc.size());
  for (const auto& e : doc) {
    Story s;
    s.id = e["id"].get<std::string>();
    s.genre = e["genre"].get<std::string>();
    s.plot = e["plot"].get<std::string>();
    s.segments = e["segments"].get<std::vector<std::string>>();
    stories.push_back(std::move(s));
  }
  return stories;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

Corpus load_corpus(const std::filesystem::path& items_path,
                   const std::optional<std::filesystem::path>& stories_path) {
  Corpus corpus;
  corpus.items = parse_items(read_json_file(items_path));
  if (stories_path) corpus.stories = parse_stories(read_json_file(*stories_path));
  return corpus;
}

const NudgeItem& select_fact(std::span<const NudgeItem> items,
                             const std::set<std::string>& preferred_genres,
                             const PlayedIds& history, Rng& rng) {
  std::vector<const NudgeItem*> eligible;
  for (const auto& it : items) {
    if (preferred_genres.count(it.genre) && !history.count(it.id)) {
      eligible.push_back(&it);
    }
  }
  if (eligible.empty()) {
    throw Error(ErrorKind::NoContent, "no unplayed item in the preferred genres");
  }
  return *eligible[rng.uniform_index(eligible.size())];
}

const std::string& next_segment(const Story& story, std::size_t cursor) {
  if (cursor >= story.segments.size()) {
    throw Error(ErrorKind::StoryExhausted,
                "story '" + story.id + "' has no segment " + std::to_string(cursor));
  }
  return story.segments[cursor];
}

std::string genre_for_session(const std::optional<std::string>& token,
                              std::span<const Story> stories, Rng& rng) {
  if (stories.empty()) throw Error(ErrorKind::NoContent, "no stories loaded");
  // Distinct genres in first-appearance order.
  std::vector<std::string> genres;
  for (const auto& s : stories) {
    if (std::find(genres.begin(), genres.end(), s.genre) == genres.end()) {
      genres.push_back(s.genre);
    }
  }
  if (token) {
    if (std::find(genres.begin(), genres.end(), *token) == genres.end()) {
      throw Error(ErrorKind::UnknownGenre, "no story with genre '" + *token + "'");
    }
    return *token;
  }
  return genres[rng.uniform_index(genres.size())];
}

SessionContent::SessionContent(const Corpus& corpus, ContentMode mode,
                               std::set<std::string> preferred_genres,
                               std::optional<std::string> genre_token,
                               std::uint64_t seed)
    : corpus_(corpus), mode_(mode), preferred_(std::move(preferred_genres)),
      rng_(seed) {
  if (mode_ == ContentMode::Facts) {
    if (preferred_.empty()) {
      for (const auto& g : fact_genres()) preferred_.emplace(g);
    }
    for (const auto& g : preferred_) {
      if (!contains(fact_genres(), g)) {
        throw Error(ErrorKind::UnknownGenre, "preferred genre '" + g + "' is unknown");
      }
    }
  } else {
    const std::string genre = genre_for_session(genre_token, corpus_.stories, rng_);
    std::vector<const Story*> candidates;
    for (const auto& s : corpus_.stories) {
      if (s.genre == genre) candidates.push_back(&s);
    }
    active_story_ = candidates[rng_.uniform_index(candidates.size())];
  }
}

const Story& SessionContent::story_for_genre(const std::string& genre) const {
  const Story* first = nullptr;
  for (const auto& s : corpus_.stories) {
    if (s.genre != genre) continue;
    if (!first) first = &s;
    if (cursor(s.id) < s.segments.size()) return s;
  }
  if (!first) throw Error(ErrorKind::UnknownGenre, "no story with genre '" + genre + "'");
  throw Error(ErrorKind::StoryExhausted, "every '" + genre + "' story has been played");
}

std::size_t SessionContent::cursor(const std::string& story_id) const {
  const auto it = cursors_.find(story_id);
  return it == cursors_.end() ? 0 : it->second;
}

NudgeRef SessionContent::play_item(const NudgeItem& item) {
  history_.insert(item.id);
  return NudgeRef{item.id, item.text, item.audio_ref};
}

NudgeRef SessionContent::play_segment(const Story& story) {
  std::size_t& c = cursors_[story.id];
  const std::string& seg = next_segment(story, c);
  NudgeRef ref{story.id + "#" + std::to_string(c), story.plot, seg};
  ++c;
  history_.insert(ref.id);
  return ref;
}

std::optional<NudgeRef> SessionContent::next_auto() {
  try {
    if (mode_ == ContentMode::Facts) {
      return play_item(select_fact(corpus_.items, preferred_, history_, rng_));
    }
    return play_segment(*active_story_);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NoContent || e.kind() == ErrorKind::StoryExhausted) {
      return std::nullopt;
    }
    throw;
  }
}

void SessionContent::check_wizard(const WizardRequest& req) const {
  if (req.item_id) {
    if (!corpus_.find_item(*req.item_id)) {
      throw Error(ErrorKind::Input, "unknown item '" + *req.item_id + "'");
    }
    return;
  }
  if (req.story_id) {
    const Story* story = corpus_.find_story(*req.story_id);
    if (!story) throw Error(ErrorKind::Input, "unknown story '" + *req.story_id + "'");
    const std::size_t c = cursor(story->id);
    if (req.segment && *req.segment != c) {
      throw Error(ErrorKind::Input, "segments play in order; next segment of '" +
                                        story->id + "' is " + std::to_string(c));
    }
    next_segment(*story, c);
    return;
  }
  if (req.genre) {
    if (mode_ == ContentMode::Stories) {
      story_for_genre(*req.genre);
      return;
    }
    if (!contains(fact_genres(), *req.genre)) {
      throw Error(ErrorKind::UnknownGenre, "unknown genre '" + *req.genre + "'");
    }
    for (const auto& it : corpus_.items) {
      if (it.genre == *req.genre && !history_.count(it.id)) return;
    }
    throw Error(ErrorKind::NoContent, "genre '" + *req.genre + "' is used up");
  }
  if (mode_ == ContentMode::Facts) {
    for (const auto& it : corpus_.items) {
      if (preferred_.count(it.genre) && !history_.count(it.id)) return;
    }
    throw Error(ErrorKind::NoContent, "no unplayed item in the preferred genres");
  }
  next_segment(*active_story_, cursor(active_story_->id));
}

NudgeRef SessionContent::next_wizard(const WizardRequest& req) {
  check_wizard(req);
  if (req.item_id) return play_item(*corpus_.find_item(*req.item_id));
  if (req.story_id) return play_segment(*corpus_.find_story(*req.story_id));
  if (req.genre) {
    if (mode_ == ContentMode::Stories) return play_segment(story_for_genre(*req.genre));
    return play_item(select_fact(corpus_.items, {*req.genre}, history_, rng_));
  }
  if (mode_ == ContentMode::Facts) {
    return play_item(select_fact(corpus_.items, preferred_, history_, rng_));
  }
  return play_segment(*active_story_);
}

}  // namespace nudge
