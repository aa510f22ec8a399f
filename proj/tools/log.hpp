#pragma once

// stderr logging; the level comes from TEXLAT_LOG (error, warn, info, debug
// or 0-3), default info.

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>

namespace texlat::cli {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level log_level() {
    static const Level level = [] {
        const char* env = std::getenv("TEXLAT_LOG");
        if (!env) return Level::info;
        const std::string v = env;
        if (v == "error" || v == "0") return Level::error;
        if (v == "warn" || v == "1") return Level::warn;
        if (v == "debug" || v == "3") return Level::debug;
        return Level::info;
    }();
    return level;
}

template <class... Args>
void log(Level level, const Args&... args) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    static std::mutex mutex;
    static constexpr const char* tags[] = {"error", "warn", "info", "debug"};
    std::ostringstream line;
    line << "texlat: " << tags[static_cast<int>(level)] << ": ";
    (line << ... << args);
    line << '\n';
    std::lock_guard lock(mutex);
    std::cerr << line.str();
}

} // namespace texlat::cli
