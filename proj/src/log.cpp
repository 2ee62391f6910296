#include "asterlab/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace asterlab {

namespace {

LogLevel parse_level() {
    const char* env = std::getenv("ASTERLAB_LOG");
    if (!env) return LogLevel::warn;
    std::string v(env);
    if (v == "error" || v == "0") return LogLevel::error;
    if (v == "warn" || v == "1") return LogLevel::warn;
    if (v == "info" || v == "2") return LogLevel::info;
    if (v == "debug" || v == "3") return LogLevel::debug;
    return LogLevel::warn;
}

const char* tag(LogLevel l) {
    switch (l) {
        case LogLevel::error: return "error";
        case LogLevel::warn: return "warn";
        case LogLevel::info: return "info";
        case LogLevel::debug: return "debug";
    }
    return "?";
}

std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

LogLevel log_level() {
    static LogLevel level = parse_level();
    return level;
}

void log_msg(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    std::lock_guard<std::mutex> lock(log_mutex());
    std::cerr << "[asterlab:" << tag(level) << "] " << msg << "\n";
}

}  // namespace asterlab
