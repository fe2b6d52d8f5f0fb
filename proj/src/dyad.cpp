#include "nudge/dyad.hpp"

#include <algorithm>

namespace nudge {

void DyadProfile::validate() const {
  for (const auto& [name, p] : {std::pair{"p_init_talk", p_init_talk},
                                {"p_continue_talk", p_continue_talk},
                                {"p_resume_talk", p_resume_talk},
                                {"p_response", p_response}}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::Config, std::string("dyad: ") + name + " must be in [0, 1]");
    }
  }
  if (response_horizon_s < 1) {
    throw Error(ErrorKind::Config, "dyad: response_horizon_s must be >= 1");
  }
}

nlohmann::json to_json(const DyadProfile& p) {
  return {{"p_init_talk", p.p_init_talk},
          {"p_continue_talk", p.p_continue_talk},
          {"p_resume_talk", p.p_resume_talk},
          {"p_response", p.p_response},
          {"response_horizon_s", p.response_horizon_s}};
}

DyadProfile dyad_profile_from_json(const nlohmann::json& j, DyadProfile base) {
  if (j.is_string()) return preset_profile(j.get<std::string>());
  if (!j.is_object()) throw Error(ErrorKind::Config, "dyad profile must be an object or preset name");
  if (j.contains("preset")) base = preset_profile(j["preset"].get<std::string>());
  base.p_init_talk = j.value("p_init_talk", base.p_init_talk);
  base.p_continue_talk = j.value("p_continue_talk", base.p_continue_talk);
  base.p_resume_talk = j.value("p_resume_talk", base.p_resume_talk);
  base.p_response = j.value("p_response", base.p_response);
  base.response_horizon_s = j.value("response_horizon_s", base.response_horizon_s);
  base.validate();
  return base;
}

DyadProfile preset_profile(std::string_view name) {
  DyadProfile p;
  if (name == "responsive") {
    p = {0.7, 0.9974, 0.005, 0.3, 10};
  } else if (name == "unresponsive") {
    p = {0.7, 0.9974, 0.005, 0.0, 10};
  } else if (name == "close_friends") {
    // Comfortable with long silences.
    p = {0.6, 0.9974, 0.0025, 0.3, 10};
  } else if (name == "whisper") {
    // Strangers waiting in a cafe: mostly quiet, talk for a few minutes when prompted.
    p = {0.2, 0.9975, 0.001, 0.3, 10};
  } else {
    throw Error(ErrorKind::Config, "unknown dyad preset '" + std::string(name) + "'");
  }
  return p;
}

DyadDetector::DyadDetector(DyadProfile profile, std::uint64_t seed)
    : profile_(profile), rng_(seed) {
  profile_.validate();
}

std::optional<ClassifiedSecond> DyadDetector::next() {
  const double u = rng_.uniform01();
  if (t_ == 0) {
    talking_ = u < profile_.p_init_talk;
  } else if (talking_) {
    talking_ = u < profile_.p_continue_talk;
  } else {
    double p = profile_.p_resume_talk;
    if (last_nudge_ && t_ > *last_nudge_ &&
        t_ <= *last_nudge_ + profile_.response_horizon_s) {
      p = std::max(p, profile_.p_response);
    }
    talking_ = u < p;
  }
  ClassifiedSecond ev{t_, talking_ ? SpeechLabel::Speech : SpeechLabel::NonSpeech, 1.0};
  ++t_;
  return ev;
}

}  // namespace nudge
