#include <cmath>
#include <map>

#include "doctest.h"
#include "nudge/config.hpp"
#include "nudge/content.hpp"
#include "support.hpp"

using namespace nudge;
using namespace nudge::testing;

namespace {

nlohmann::json item_json(const std::string& id, const std::string& genre,
                         const std::string& type, const std::string& text) {
  return {{"id", id}, {"genre", genre}, {"type", type}, {"text", text}};
}

Story story(const std::string& id, const std::string& genre, std::size_t segments) {
  Story s{id, genre, "plot of " + id, {}};
  for (std::size_t i = 0; i < segments; ++i) s.segments.push_back(id + "/" + std::to_string(i));
  return s;
}

// Max |z| of the per-cell counts against a uniform expectation.
double max_abs_z(const std::map<std::string, int>& counts, int cells, int draws) {
  const double p = 1.0 / cells;
  const double mean = draws * p;
  const double sd = std::sqrt(draws * p * (1 - p));
  double worst = 0;
  for (const auto& [k, c] : counts) worst = std::max(worst, std::abs(c - mean) / sd);
  return worst;
}

}  // namespace

TEST_CASE("fixture corpus counts") {
  const auto items = check_items(read_json_file(data_path("corpus.json")));
  CHECK(items.ok());
  CHECK(items.item_count == 90);
  CHECK(items.genres.size() == 8);
  CHECK(items.types.size() == 6);
  const auto stories = check_stories(read_json_file(data_path("stories.json")));
  CHECK(stories.ok());
  CHECK(stories.story_count == 6);
  CHECK(stories.genres.size() == 6);

  const Corpus& builtin = builtin_corpus();
  CHECK(builtin.items.size() == 90);
  CHECK(builtin.stories.size() == 6);
  // The compiled-in copy matches the data files.
  CHECK(builtin.items == parse_items(read_json_file(data_path("corpus.json"))));
}

TEST_CASE("every fact genre carries all six types") {
  std::map<std::string, std::set<FactType>> by_genre;
  for (const auto& it : builtin_corpus().items) by_genre[it.genre].insert(it.type);
  CHECK(by_genre.size() == 8);
  for (const auto& [g, types] : by_genre) CHECK_MESSAGE(types.size() == 6, g);
}

TEST_CASE("the published Adventure example is in the corpus") {
  const std::string sentence =
      "Adventure films became popular in Hollywood in the 30s and 40s with the films Robin "
      "Hood and Zorro.";
  const auto& items = builtin_corpus().items;
  auto it = std::find_if(items.begin(), items.end(),
                         [&](const NudgeItem& i) { return i.text == sentence; });
  REQUIRE(it != items.end());
  CHECK(it->genre == "Adventure");
  CHECK(it->type == FactType::Popularity);
}

TEST_CASE("select_fact: forced choice and preference filter") {
  std::vector<NudgeItem> one = {{"a1", "Adventure", FactType::Theme, "x", "", ""}};
  Rng rng(1);
  CHECK(select_fact(one, {"Adventure"}, {}, rng).id == "a1");

  Rng rng2(5);
  for (int i = 0; i < 50; ++i) {
    CHECK(select_fact(builtin_corpus().items, {"Adventure"}, {}, rng2).genre == "Adventure");
  }
}

TEST_CASE("select_fact: exhaustion raises NoContent") {
  PlayedIds all;
  for (const auto& it : builtin_corpus().items) all.insert(it.id);
  Rng rng(3);
  try {
    select_fact(builtin_corpus().items, {"Adventure"}, all, rng);
    FAIL("expected NoContent");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoContent);
  }
}

TEST_CASE("no repeats until the whole corpus is used") {
  for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
    SessionContent content(builtin_corpus(), ContentMode::Facts, {}, std::nullopt, seed);
    std::set<std::string> seen;
    while (auto ref = content.next_auto()) {
      REQUIRE(seen.insert(ref->id).second);
    }
    CHECK(seen.size() == 90);
    CHECK_FALSE(content.next_auto());  // history is not reset implicitly
    content.reset_history();
    CHECK(content.next_auto());
  }
}

TEST_CASE("select_fact is uniform over eligible items") {
  const auto& items = builtin_corpus().items;
  Rng rng(2024);
  std::map<std::string, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[select_fact(items, {"Adventure"}, {}, rng).id];
  CHECK(counts.size() == 12);
  CHECK(max_abs_z(counts, 12, draws) < 3.0);
}

TEST_CASE("next_segment") {
  const Story s = story("st", "Crime", 3);
  CHECK(next_segment(s, 0) == "st/0");
  std::vector<std::string> order;
  for (std::size_t c = 0; c < 3; ++c) order.push_back(next_segment(s, c));
  CHECK(order == std::vector<std::string>{"st/0", "st/1", "st/2"});
  try {
    next_segment(s, 3);
    FAIL("expected StoryExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StoryExhausted);
  }
}

TEST_CASE("genre_for_session") {
  const auto& stories = builtin_corpus().stories;
  Rng rng(1);
  CHECK(genre_for_session(std::string("Crime"), stories, rng) == "Crime");
  try {
    genre_for_session(std::string("Western"), stories, rng);
    FAIL("expected UnknownGenre");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownGenre);
  }
  std::vector<Story> single = {story("a", "Tragedy", 2), story("b", "Tragedy", 1)};
  CHECK(genre_for_session(std::nullopt, single, rng) == "Tragedy");

  Rng r1(77), r2(77);
  CHECK(genre_for_session(std::nullopt, stories, r1) ==
        genre_for_session(std::nullopt, stories, r2));

  // A token never consumes randomness.
  Rng t1(8), t2(8);
  genre_for_session(std::string("Comedy"), stories, t1);
  CHECK(t1.next_u64() == t2.next_u64());
}

TEST_CASE("genre_for_session without a token is uniform") {
  const auto& stories = builtin_corpus().stories;
  Rng rng(31337);
  std::map<std::string, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[genre_for_session(std::nullopt, stories, rng)];
  CHECK(counts.size() == 6);
  CHECK(max_abs_z(counts, 6, draws) < 3.0);
}

TEST_CASE("loader rejects bad entries and names them") {
  auto doc = nlohmann::json::array({item_json("a", "Adventure", "Theme", "t1"),
                                    item_json("b", "Western", "Theme", "t2"),
                                    item_json("c", "Drama", "Trivia", "t3"),
                                    item_json("a", "Drama", "Theme", "t4"),
                                    item_json("e", "Adventure", "Theme", "t1"),
                                    {{"id", "f"}, {"genre", "Drama"}}});
  const auto report = check_items(doc);
  CHECK_FALSE(report.ok());
  auto has = [&](const std::string& needle) {
    return std::any_of(report.errors.begin(), report.errors.end(),
                       [&](const std::string& e) { return e.find(needle) != std::string::npos; });
  };
  CHECK(has("unknown genre 'Western'"));
  CHECK(has("unknown type 'Trivia'"));
  CHECK(has("duplicate id"));
  CHECK(has("duplicate (genre, type, text)"));
  CHECK(has("missing type"));
  CHECK(has("missing text"));
  try {
    parse_items(doc);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }

  auto bad_story = nlohmann::json::array(
      {{{"id", "s"}, {"genre", "Fantasy"}, {"plot", "p"}, {"segments", nlohmann::json::array()}}});
  CHECK_FALSE(check_stories(bad_story).ok());
  CHECK_THROWS_AS(parse_stories(bad_story), Error);
}

TEST_CASE("stories mode plays the session's story in order") {
  Corpus corpus;
  corpus.stories = {story("crime-a", "Crime", 3), story("fant-a", "Fantasy", 2)};
  SessionContent content(corpus, ContentMode::Stories, {}, std::string("Crime"), 1);
  REQUIRE(content.active_story());
  CHECK(content.active_story()->id == "crime-a");
  CHECK(content.next_auto()->id == "crime-a#0");
  CHECK(content.next_auto()->id == "crime-a#1");
  CHECK(content.next_auto()->audio_ref == "crime-a/2");
  CHECK_FALSE(content.next_auto());
}

TEST_CASE("wizard requests") {
  Corpus corpus = builtin_corpus();
  corpus.stories.push_back(story("crime-b", "Crime", 1));
  SessionContent content(corpus, ContentMode::Stories, {}, std::string("Fantasy"), 4);

  // Segments must be requested in order.
  WizardRequest skip{std::nullopt, std::nullopt, std::string("crime-mansion"), 1};
  CHECK_THROWS_AS(content.check_wizard(skip), Error);
  WizardRequest first{std::nullopt, std::nullopt, std::string("crime-mansion"), 0};
  CHECK(content.next_wizard(first).id == "crime-mansion#0");
  CHECK(content.cursor("crime-mansion") == 1);
  CHECK(content.next_wizard(skip).id == "crime-mansion#1");

  // A genre request walks the genre's stories, moving on when one runs out.
  const Story* mansion = corpus.find_story("crime-mansion");
  REQUIRE(mansion);
  WizardRequest crime{std::string("Crime"), std::nullopt, std::nullopt, std::nullopt};
  for (std::size_t i = 2; i < mansion->segments.size(); ++i) {
    CHECK(content.next_wizard(crime).id == "crime-mansion#" + std::to_string(i));
  }
  CHECK(content.next_wizard(crime).id == "crime-b#0");
  try {
    content.next_wizard(crime);
    FAIL("expected StoryExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StoryExhausted);
  }

  WizardRequest unknown{std::string("Western"), std::nullopt, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(content.check_wizard(unknown), Error);
  WizardRequest item{std::nullopt, std::string("adv-01"), std::nullopt, std::nullopt};
  CHECK(content.next_wizard(item).id == "adv-01");
  WizardRequest missing{std::nullopt, std::string("nope"), std::nullopt, std::nullopt};
  CHECK_THROWS_AS(content.check_wizard(missing), Error);
}

TEST_CASE("facts mode validates preferred genres") {
  CHECK_THROWS_AS(SessionContent(builtin_corpus(), ContentMode::Facts, {"Western"}, std::nullopt, 1),
                  Error);
  SessionContent c(builtin_corpus(), ContentMode::Facts, {"Horror"}, std::nullopt, 1);
  for (int i = 0; i < 11; ++i) {
    auto ref = c.next_auto();
    REQUIRE(ref);
    CHECK(builtin_corpus().find_item(ref->id)->genre == "Horror");
  }
  CHECK_FALSE(c.next_auto());
}
