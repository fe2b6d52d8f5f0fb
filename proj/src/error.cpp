#include "nudge/error.hpp"

namespace nudge {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Sequencing: return "sequencing";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Config: return "config";
    case ErrorKind::NoContent: return "no_content";
    case ErrorKind::StoryExhausted: return "story_exhausted";
    case ErrorKind::UnknownGenre: return "unknown_genre";
    case ErrorKind::State: return "state";
    case ErrorKind::Rate: return "rate";
    case ErrorKind::UndefinedMetrics: return "undefined_metrics";
    case ErrorKind::MissingField: return "missing_field";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace nudge
