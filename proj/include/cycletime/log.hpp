#pragma once

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <string>

namespace cycletime {

/// Shared stderr logger. The level comes from CYCLETIME_LOG
/// (trace|debug|info|warn|error|off), defaulting to warn.
inline std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto existing = spdlog::get("cycletime");
    if (existing) return existing;
    auto log = spdlog::stderr_color_mt("cycletime");
    log->set_pattern("[%l] %v");
    const char* env = std::getenv("CYCLETIME_LOG");
    log->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return log;
  }();
  return instance;
}

}  // namespace cycletime
