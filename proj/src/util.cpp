// SPDX-License-Identifier: Apache-2.0
#include "ellopt/util.hpp"

#include <cstdio>
#include <cstring>

namespace ellopt {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("ELLOPT_LOG");
        if (!env) return LogLevel::quiet;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        if (std::strcmp(env, "info") == 0) return LogLevel::info;
        return LogLevel::quiet;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::fprintf(stderr, "[ellopt] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::fprintf(stderr, "[ellopt:debug] %s\n", msg.c_str());
}

}  // namespace ellopt
