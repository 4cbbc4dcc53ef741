#pragma once

#include <functional>
#include <string>

namespace swarmnav {

enum class LogLevel { debug, info, warning, error };

/// Process-wide log handler. Defaults to stderr for warning and above.
using LogHandler = std::function<void(LogLevel, const std::string&)>;
void set_log_handler(LogHandler sink);
void set_log_level(LogLevel level);
void log(LogLevel level, const std::string& message);

inline void log_info(const std::string& m) { log(LogLevel::info, m); }
inline void log_warning(const std::string& m) { log(LogLevel::warning, m); }

}  // namespace swarmnav
