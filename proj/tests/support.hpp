#pragma once

// Helpers shared by the test binaries.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nudge/detect.hpp"
#include "nudge/score.hpp"

namespace nudge::testing {

inline std::vector<SpeechLabel> labels(std::initializer_list<int> bits) {
  std::vector<SpeechLabel> out;
  for (int b : bits) out.push_back(b ? SpeechLabel::Speech : SpeechLabel::NonSpeech);
  return out;
}

inline std::vector<SpeechLabel> repeat(SpeechLabel l, std::size_t n) {
  return std::vector<SpeechLabel>(n, l);
}

inline std::vector<SpeechLabel> concat(std::vector<SpeechLabel> a,
                                       const std::vector<SpeechLabel>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// Bursty random label stream: runs of speech/silence with random lengths.
inline std::vector<SpeechLabel> fuzz_labels(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> len(1, 200);
  std::vector<SpeechLabel> out;
  bool talk = gen() & 1;
  while (out.size() < n) {
    const int run = len(gen);
    for (int i = 0; i < run && out.size() < n; ++i) {
      out.push_back(talk ? SpeechLabel::Speech : SpeechLabel::NonSpeech);
    }
    talk = !talk;
  }
  return out;
}

inline ConversationState feed(const std::vector<SpeechLabel>& ls, const ScoreConfig& cfg,
                              ConversationState s = {}) {
  for (auto l : ls) s = update(s, {s.t + 1, l, 1.0}, cfg);
  return s;
}

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("nudge-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(NUDGE_DATA_DIR) / rel;
}

}  // namespace nudge::testing
