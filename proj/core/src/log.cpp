#include "boga/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace boga::log {

namespace {

Level level_from_env() {
    const char* env = std::getenv("BOGA_LOG_LEVEL");
    if (env == nullptr) return Level::warn;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "warn") == 0) return Level::warn;
    if (std::strcmp(env, "info") == 0) return Level::info;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    return Level::warn;
}

std::atomic<Level>& level_storage() {
    static std::atomic<Level> lvl{level_from_env()};
    return lvl;
}

const char* label(Level lvl) {
    switch (lvl) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    case Level::debug: return "debug";
    }
    return "?";
}

} // namespace

Level level() { return level_storage().load(std::memory_order_relaxed); }

void set_level(Level lvl) { level_storage().store(lvl, std::memory_order_relaxed); }

void write(Level lvl, const std::string& message) {
    if (lvl > level()) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::fprintf(stderr, "[boga:%s] %s\n", label(lvl), message.c_str());
}

} // namespace boga::log
