#pragma once

#include <stdexcept>
#include <string>

namespace elio {

enum class ErrorKind {
  NonMonotonicTime,
  DataGap,
  InsufficientPoints,
  NotStatic,
  ConfigError,
  MissingReference,
  ParseError,
  DegenerateStreak,
  EmptyScan,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorKind::DataGap: return "DataGap";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::NotStatic: return "NotStatic";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::MissingReference: return "MissingReference";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DegenerateStreak: return "DegenerateStreak";
    case ErrorKind::EmptyScan: return "EmptyScan";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace elio
