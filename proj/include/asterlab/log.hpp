#pragma once

#include <string>

namespace asterlab {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Verbosity comes from the ASTERLAB_LOG environment variable
// (error|warn|info|debug or 0..3). Default: warn.
LogLevel log_level();

void log_msg(LogLevel level, const std::string& msg);

inline void log_error(const std::string& msg) { log_msg(LogLevel::error, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::warn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::debug, msg); }

}  // namespace asterlab
