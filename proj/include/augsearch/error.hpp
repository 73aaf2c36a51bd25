#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace augsearch {

// Error categories surface verbatim in CLI output, keep names stable.
enum class ErrorKind {
  Parameter,
  Io,
  MissingFile,
  MalformedHeader,
  UnsupportedBitDepth,
  UnsupportedChannels,
  NotImplemented,
  UndefinedMetric,
  Config,
  Schema,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Io: return "io";
    case ErrorKind::MissingFile: return "missing_file";
    case ErrorKind::MalformedHeader: return "malformed_header";
    case ErrorKind::UnsupportedBitDepth: return "unsupported_bit_depth";
    case ErrorKind::UnsupportedChannels: return "unsupported_channels";
    case ErrorKind::NotImplemented: return "not_implemented";
    case ErrorKind::UndefinedMetric: return "undefined_metric";
    case ErrorKind::Config: return "config";
    case ErrorKind::Schema: return "schema";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::Parameter, message);
}

}  // namespace augsearch
