#include "nudge/detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nudge {

void AudioFrame::validate() const {
  if (sample_rate <= 0) {
    throw Error(ErrorKind::Input, "audio frame: sample rate must be positive");
  }
  if (samples.size() != static_cast<std::size_t>(sample_rate)) {
    throw Error(ErrorKind::Input,
                "audio frame: expected " + std::to_string(sample_rate) +
                    " samples, got " + std::to_string(samples.size()));
  }
  for (float s : samples) {
    if (!(s >= -1.0f && s <= 1.0f)) {
      throw Error(ErrorKind::Input, "audio frame: sample outside [-1, 1]");
    }
  }
}

void DetectorConfig::validate() const {
  if (!(rms_threshold > 0.0) || !std::isfinite(rms_threshold)) {
    throw Error(ErrorKind::Config, "detector: rms_threshold must be > 0");
  }
}

double rms(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

ClassifiedSecond classify(const AudioFrame& frame, const DetectorConfig& cfg,
                          Second t) {
  frame.validate();
  cfg.validate();
  const double level = rms(frame.samples);
  const double distance = std::abs(level - cfg.rms_threshold);
  ClassifiedSecond out;
  out.t = t;
  out.label = level >= cfg.rms_threshold ? SpeechLabel::Speech
                                         : SpeechLabel::NonSpeech;
  out.confidence = std::min(1.0, distance / cfg.rms_threshold);
  return out;
}

std::optional<ClassifiedSecond> TraceDetector::next() {
  if (cursor_ >= labels_.size()) return std::nullopt;
  ClassifiedSecond ev;
  ev.t = static_cast<Second>(cursor_);
  ev.label = labels_[cursor_];
  ev.confidence = 1.0;
  ++cursor_;
  return ev;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<SpeechLabel> parse_trace(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty trace");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::size_t label_col = 0;
  bool session_layout = false;
  if (line == "t,label") {
    label_col = 1;
  } else if (line == "Time,Amount of Conversation,Speech,Intervention") {
    label_col = 2;
    session_layout = true;
  } else {
    throw ParseError(lineno, "unrecognized trace header '" + line + "'");
  }

  std::vector<SpeechLabel> labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::size_t want = session_layout ? 4 : 2;
    if (cells.size() != want) {
      throw ParseError(lineno, "expected " + std::to_string(want) +
                                   " columns, got " +
                                   std::to_string(cells.size()));
    }
    if (!session_layout) {
      const std::string expected_t = std::to_string(labels.size());
      if (cells[0] != expected_t) {
        throw ParseError(lineno, "expected t=" + expected_t + ", got '" +
                                     cells[0] + "'");
      }
    }
    const std::string& label = cells[label_col];
    if (label == "TRUE") {
      labels.push_back(SpeechLabel::Speech);
    } else if (label == "FALSE") {
      labels.push_back(SpeechLabel::NonSpeech);
    } else if (session_layout && label == "-" && cells[3] == "TRUE") {
      labels.push_back(SpeechLabel::NonSpeech);
    } else {
      throw ParseError(lineno, "bad speech label '" + label + "'");
    }
  }
  return labels;
}

std::vector<SpeechLabel> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open trace " + path.string());
  return parse_trace(in);
}

std::optional<ClassifiedSecond> EnergyDetector::next() {
  auto frame = source_->next_frame();
  if (!frame) return std::nullopt;
  return classify(*frame, cfg_, t_++);
}

}  // namespace nudge
