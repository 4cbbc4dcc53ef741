#include "swarmnav/log.hpp"

#include <iostream>
#include <mutex>

namespace swarmnav {

namespace {

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

LogLevel& threshold() {
  static LogLevel level = LogLevel::warning;
  return level;
}

LogHandler& sink() {
  static LogHandler s = [](LogLevel level, const std::string& message) {
    static const char* names[] = {"debug", "info", "warning", "error"};
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << message << '\n';
  };
  return s;
}

}  // namespace

void set_log_handler(LogHandler s) {
  std::lock_guard lock(log_mutex());
  sink() = std::move(s);
}

void set_log_level(LogLevel level) {
  std::lock_guard lock(log_mutex());
  threshold() = level;
}

void log(LogLevel level, const std::string& message) {
  std::lock_guard lock(log_mutex());
  if (level < threshold() || !sink()) return;
  sink()(level, message);
}

}  // namespace swarmnav
