#pragma once

// Parser for the linear-move NC dialect: G0/G00, G1/G01, X/Y/Z/F words,
// N numbers and comments. Arcs, inch mode, incremental mode and cutter
// compensation are rejected; setup words (M, S, T, G17, G40, G43, ...) are
// skipped.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cycletime/error.hpp"
#include "cycletime/geometry.hpp"
#include "cycletime/log.hpp"

namespace cycletime::gcode {

inline constexpr double kDefaultRapidRate = 30000.0;  // mm/min
inline constexpr double kCoincidentTolerance = 1e-9;  // mm

enum class BlockMotion { None, Rapid, Linear };
enum class MotionMode { Rapid, Linear };

struct NcBlock {
  std::optional<int> line_number;  // N word
  BlockMotion motion = BlockMotion::None;
  std::optional<double> x, y, z;
  std::optional<double> f;  // mm/min
  std::string raw_text;
  int source_line = 0;  // 1-based line in the program text

  bool has_coordinates() const { return x || y || z; }
};

struct CutterLocation {
  int index = 0;  // 1-based
  Vec3 position;
  double commanded_feedrate = 0.0;  // mm/min
  MotionMode mode = MotionMode::Linear;

  bool operator==(const CutterLocation&) const = default;
};

struct Toolpath {
  std::vector<CutterLocation> locations;
  std::string source_name;
  double rapid_rate = kDefaultRapidRate;

  std::size_t size() const { return locations.size(); }
  /// 1-based access matching CutterLocation::index.
  const CutterLocation& at(int n) const { return locations.at(static_cast<std::size_t>(n - 1)); }
};

struct ToolpathSummary {
  std::size_t block_count = 0;
  double total_length = 0.0;  // mm
  double rapid_length = 0.0;
  double linear_length = 0.0;
};

namespace detail {

inline bool is_skipped_g(double code) {
  // Plane selection, metric units, compensation cancel, tool length offset,
  // work offsets, path control, canned-cycle cancel, absolute mode, feed mode.
  static constexpr double kSkipped[] = {17, 18, 19, 21, 40, 43, 49, 54, 55, 56,
                                        57, 58, 59, 61, 64, 80, 90, 94};
  for (double s : kSkipped) {
    if (code == s) return true;
  }
  return false;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string format_word(char letter, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%c%g", letter, value);
  return buf;
}

/// Parses one line into a block; returns nullopt for comment-only lines.
inline std::optional<NcBlock> parse_line(std::string_view line, int source_line) {
  NcBlock block;
  block.raw_text = trim(line);
  block.source_line = source_line;
  bool kept = false;
  bool seen_motion = false;

  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '%') {
      ++i;
      continue;
    }
    if (c == ';') break;
    if (c == '(') {
      const auto close = line.find(')', i);
      if (close == std::string_view::npos) {
        throw Error(ErrorKind::MalformedBlock, "unterminated comment", source_line);
      }
      i = close + 1;
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) {
      throw Error(ErrorKind::MalformedBlock,
                  std::string("unexpected character '") + c + "'", source_line);
    }
    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    ++i;
    while (i < n && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t end = i;
    if (end < n && (line[end] == '+' || line[end] == '-')) ++end;
    while (end < n && (std::isdigit(static_cast<unsigned char>(line[end])) || line[end] == '.')) ++end;
    std::string number(line.substr(i, end - i));
    if (!number.empty() && number.front() == '+') number.erase(0, 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (number.empty() || ec != std::errc() || ptr != number.data() + number.size()) {
      throw Error(ErrorKind::MalformedBlock,
                  std::string("word '") + letter + "' has no valid number", source_line);
    }
    i = end;

    auto set_axis = [&](std::optional<double>& slot) {
      if (slot) {
        throw Error(ErrorKind::MalformedBlock,
                    std::string("axis word ") + letter + " repeated", source_line);
      }
      slot = value;
      kept = true;
    };

    switch (letter) {
      case 'G': {
        if (value == 0.0 || value == 1.0) {
          const auto motion = value == 0.0 ? BlockMotion::Rapid : BlockMotion::Linear;
          if (seen_motion && block.motion != motion) {
            throw Error(ErrorKind::MalformedBlock, "conflicting motion words", source_line);
          }
          block.motion = motion;
          seen_motion = true;
          kept = true;
        } else if (is_skipped_g(value)) {
          logger()->debug("line {}: skipping {}", source_line, format_word('G', value));
        } else {
          throw Error(ErrorKind::UnsupportedWord,
                      format_word('G', value) + " is not supported", source_line);
        }
        break;
      }
      case 'X': set_axis(block.x); break;
      case 'Y': set_axis(block.y); break;
      case 'Z': set_axis(block.z); break;
      case 'F':
        if (!(value > 0.0)) {
          throw Error(ErrorKind::NonPositiveFeed,
                      "feedrate must be positive, got " + format_word('F', value), source_line);
        }
        block.f = value;
        kept = true;
        break;
      case 'N':
        block.line_number = static_cast<int>(value);
        break;
      case 'M':
      case 'S':
      case 'T':
      case 'H':
      case 'D':
      case 'O':
        logger()->debug("line {}: skipping {}", source_line, format_word(letter, value));
        break;
      default:
        throw Error(ErrorKind::UnsupportedWord,
                    format_word(letter, value) + " is not supported", source_line);
    }
  }
  if (!kept) return std::nullopt;
  return block;
}

}  // namespace detail

/// Tokenizes a program into retained blocks (comment-only and setup-only
/// lines are dropped).
inline std::vector<NcBlock> parse_nc_blocks(std::string_view text) {
  std::vector<NcBlock> blocks;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (auto block = detail::parse_line(line, line_no)) blocks.push_back(std::move(*block));
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  return blocks;
}

/// Resolves modal state into an ordered list of cutter locations. Rapid
/// moves carry `rapid_rate`; moves that do not change the position are merged
/// into the previous location.
inline Toolpath parse_nc_program(std::string_view text, double rapid_rate = kDefaultRapidRate,
                                 std::string source_name = {}) {
  if (!(rapid_rate > 0.0)) {
    throw Error(ErrorKind::NonPositiveFeed, "rapid rate must be positive");
  }
  Toolpath tp;
  tp.source_name = std::move(source_name);
  tp.rapid_rate = rapid_rate;

  BlockMotion modal_motion = BlockMotion::None;
  std::optional<double> modal_feed;

  for (const NcBlock& block : parse_nc_blocks(text)) {
    if (block.motion != BlockMotion::None) modal_motion = block.motion;
    if (block.f) modal_feed = block.f;
    if (!block.has_coordinates()) continue;

    if (modal_motion == BlockMotion::None) {
      throw Error(ErrorKind::MalformedBlock, "coordinates given before any G0/G1",
                  block.source_line);
    }

    Vec3 target;
    if (tp.locations.empty()) {
      if (!block.x || !block.y || !block.z) {
        throw Error(ErrorKind::MissingInitialPosition,
                    "first move must specify X, Y and Z", block.source_line);
      }
      target = {*block.x, *block.y, *block.z};
    } else {
      target = tp.locations.back().position;
      if (block.x) target.x = *block.x;
      if (block.y) target.y = *block.y;
      if (block.z) target.z = *block.z;
    }

    CutterLocation cl;
    cl.position = target;
    if (modal_motion == BlockMotion::Rapid) {
      cl.mode = MotionMode::Rapid;
      cl.commanded_feedrate = rapid_rate;
    } else {
      if (!modal_feed) {
        throw Error(ErrorKind::MalformedBlock, "linear move without a feedrate",
                    block.source_line);
      }
      cl.mode = MotionMode::Linear;
      cl.commanded_feedrate = *modal_feed;
    }

    if (!tp.locations.empty() &&
        nearly_equal(tp.locations.back().position, target, kCoincidentTolerance)) {
      logger()->debug("line {}: zero-length move merged", block.source_line);
      continue;
    }
    cl.index = static_cast<int>(tp.locations.size()) + 1;
    tp.locations.push_back(cl);
  }
  return tp;
}

/// One fully specified block per location; parsing the result with the same
/// rapid rate reproduces the toolpath exactly.
inline std::string to_canonical_nc(const Toolpath& tp) {
  std::string out;
  char buf[256];
  for (const auto& cl : tp.locations) {
    if (cl.mode == MotionMode::Rapid) {
      std::snprintf(buf, sizeof buf, "N%d G0 X%.17g Y%.17g Z%.17g\n", cl.index,
                    cl.position.x, cl.position.y, cl.position.z);
    } else {
      std::snprintf(buf, sizeof buf, "N%d G1 X%.17g Y%.17g Z%.17g F%.17g\n", cl.index,
                    cl.position.x, cl.position.y, cl.position.z, cl.commanded_feedrate);
    }
    out += buf;
  }
  return out;
}

inline ToolpathSummary toolpath_summary(const Toolpath& tp) {
  ToolpathSummary s;
  s.block_count = tp.locations.size();
  for (std::size_t i = 1; i < tp.locations.size(); ++i) {
    const double len = distance(tp.locations[i - 1].position, tp.locations[i].position);
    s.total_length += len;
    if (tp.locations[i].mode == MotionMode::Rapid) {
      s.rapid_length += len;
    } else {
      s.linear_length += len;
    }
  }
  return s;
}

}  // namespace cycletime::gcode
