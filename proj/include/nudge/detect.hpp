#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nudge/error.hpp"

namespace nudge {

enum class SpeechLabel : std::uint8_t { NonSpeech, Speech };

/// One second of mono audio, samples normalized to [-1, 1].
struct AudioFrame {
  std::vector<float> samples;
  int sample_rate = 16000;

  /// Throws ErrorKind::Input unless samples.size() == sample_rate and every
  /// sample lies in [-1, 1].
  void validate() const;
};

struct ClassifiedSecond {
  Second t = 0;
  SpeechLabel label = SpeechLabel::NonSpeech;
  double confidence = 1.0;

  bool speech() const { return label == SpeechLabel::Speech; }
  bool operator==(const ClassifiedSecond&) const = default;
};

struct DetectorConfig {
  double rms_threshold = 0.02;

  void validate() const;
};

double rms(std::span<const float> samples);

// Energy gate: Speech iff RMS >= threshold. Confidence is
// min(1, |RMS - threshold| / threshold), so it is 0 right at the gate and
// saturates one threshold-width away from it.
ClassifiedSecond classify(const AudioFrame& frame, const DetectorConfig& cfg,
                          Second t = 0);

/// Pull-based source of classified seconds. An empty optional means the
/// stream has ended.
class Detector {
public:
  virtual ~Detector() = default;
  virtual std::optional<ClassifiedSecond> next() = 0;
};

/// Replays a recorded label sequence with confidence 1.0.
class TraceDetector : public Detector {
public:
  explicit TraceDetector(std::vector<SpeechLabel> labels)
      : labels_(std::move(labels)) {}

  std::optional<ClassifiedSecond> next() override;

  std::size_t size() const { return labels_.size(); }
  bool exhausted() const { return cursor_ >= labels_.size(); }

private:
  std::vector<SpeechLabel> labels_;
  std::size_t cursor_ = 0;
};

// Trace files. Two layouts are accepted:
//   t,label                  (label TRUE | FALSE)
//   Time,Amount of Conversation,Speech,Intervention   (a session log)
// In a session log the intervention rows carry "-" under Speech; they replay
// as NonSpeech because the device itself was talking during that second.
std::vector<SpeechLabel> parse_trace(std::istream& in);
std::vector<SpeechLabel> load_trace(const std::filesystem::path& path);

/// Source of one-second audio frames; empty optional at end of stream.
class FrameSource {
public:
  virtual ~FrameSource() = default;
  virtual std::optional<AudioFrame> next_frame() = 0;
};

/// Mono 16-bit PCM WAV, chunked into one-second frames. A trailing partial
/// second is dropped.
class WavFrameSource : public FrameSource {
public:
  explicit WavFrameSource(const std::filesystem::path& path);

  std::optional<AudioFrame> next_frame() override;

  int sample_rate() const { return sample_rate_; }
  std::size_t seconds() const { return pcm_.size() / sample_rate_; }

private:
  std::vector<std::int16_t> pcm_;
  int sample_rate_ = 0;
  std::size_t cursor_ = 0;
};

/// Writes mono 16-bit PCM; used by tools and tests to produce fixtures.
void write_wav(const std::filesystem::path& path,
               std::span<const float> samples, int sample_rate);

/// Runs the energy gate over a frame source.
class EnergyDetector : public Detector {
public:
  EnergyDetector(std::unique_ptr<FrameSource> source, DetectorConfig cfg)
      : source_(std::move(source)), cfg_(cfg) {}

  std::optional<ClassifiedSecond> next() override;

private:
  std::unique_ptr<FrameSource> source_;
  DetectorConfig cfg_;
  Second t_ = 0;
};

}  // namespace nudge
