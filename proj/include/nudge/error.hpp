#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nudge {

/// Session time in whole seconds since session start.
using Second = std::int64_t;

enum class ErrorKind {
  Input,        // malformed frame, bad argument
  Sequencing,   // out-of-order event or record
  Parse,        // malformed file content
  Config,       // invalid configuration
  NoContent,    // no eligible nudge item
  StoryExhausted,
  UnknownGenre,
  State,        // command issued in the wrong session state
  Rate,         // more than one intervention in a second
  UndefinedMetrics,
  MissingField,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Parse error that remembers the 1-based line it was raised on.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace nudge
