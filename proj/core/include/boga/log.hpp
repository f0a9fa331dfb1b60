#pragma once

#include <string>

namespace boga::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Current level, read once from BOGA_LOG_LEVEL (error|warn|info|debug).
Level level();
void set_level(Level lvl);

void write(Level lvl, const std::string& message);

inline void error(const std::string& m) { write(Level::error, m); }
inline void warn(const std::string& m) { write(Level::warn, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void debug(const std::string& m) { write(Level::debug, m); }

} // namespace boga::log
