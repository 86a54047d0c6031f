#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cycletime {

enum class ErrorKind {
  UnsupportedWord,
  MalformedBlock,
  MissingInitialPosition,
  NonPositiveFeed,
  DegenerateSegment,
  ToolpathTooShort,
  EmptyLog,
  NoOverlap,
  EmptyDataset,
  UnknownSource,
  OverlappingRanges,
  InvalidSpec,
  ShapeMismatch,
  LengthMismatch,
  Empty,
  EmptySet,
  DivergenceDetected,
  Io,
  CorruptModel,
  NonPositiveMeasured,
  InvalidLimits,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnsupportedWord: return "UnsupportedWord";
    case ErrorKind::MalformedBlock: return "MalformedBlock";
    case ErrorKind::MissingInitialPosition: return "MissingInitialPosition";
    case ErrorKind::NonPositiveFeed: return "NonPositiveFeed";
    case ErrorKind::DegenerateSegment: return "DegenerateSegment";
    case ErrorKind::ToolpathTooShort: return "ToolpathTooShort";
    case ErrorKind::EmptyLog: return "EmptyLog";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::UnknownSource: return "UnknownSource";
    case ErrorKind::OverlappingRanges: return "OverlappingRanges";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::Io: return "Io";
    case ErrorKind::CorruptModel: return "CorruptModel";
    case ErrorKind::NonPositiveMeasured: return "NonPositiveMeasured";
    case ErrorKind::InvalidLimits: return "InvalidLimits";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library. `line()` is the 1-based source line
/// for errors that originate in an NC program.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<int> line = std::nullopt)
      : std::runtime_error(format(kind, message, line)),
        kind_(kind),
        line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<int> line() const noexcept { return line_; }

 private:
  static std::string format(ErrorKind kind, const std::string& message,
                            std::optional<int> line) {
    std::string out(to_string(kind));
    if (line) out += " at line " + std::to_string(*line);
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::optional<int> line_;
};

}  // namespace cycletime
