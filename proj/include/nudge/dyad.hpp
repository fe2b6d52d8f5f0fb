#pragma once

#include <optional>

#include "json.hpp"
#include "nudge/detect.hpp"
#include "nudge/rng.hpp"

namespace nudge {

// Joint talking/silent state of a pair, one step per second.
struct DyadProfile {
  double p_init_talk = 0.5;
  double p_continue_talk = 0.99;  // talking -> talking
  double p_resume_talk = 0.01;    // silent -> talking
  double p_response = 0.0;        // resume probability shortly after a nudge
  int response_horizon_s = 10;    // k

  void validate() const;
};

nlohmann::json to_json(const DyadProfile& p);
DyadProfile dyad_profile_from_json(const nlohmann::json& j, DyadProfile base = {});

/// Named calibration presets: "responsive", "unresponsive", "close_friends",
/// "whisper". Throws ErrorKind::Config for unknown names.
DyadProfile preset_profile(std::string_view name);

// Two-state Markov chain driven by exactly one uniform draw per second, so two
// detectors with the same seed share their random numbers whatever the nudges
// do. A nudge at second t lifts the resume probability to
// max(p_resume_talk, p_response) for seconds t+1 .. t+k.
class DyadDetector : public Detector {
public:
  DyadDetector(DyadProfile profile, std::uint64_t seed);

  std::optional<ClassifiedSecond> next() override;

  void notify_nudge(Second t) { last_nudge_ = t; }
  bool talking() const { return talking_; }

private:
  DyadProfile profile_;
  Rng rng_;
  Second t_ = 0;
  bool talking_ = false;
  std::optional<Second> last_nudge_;
};

}  // namespace nudge
