// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace ellopt {

/// Run jobs 0..count-1 on up to `threads` workers.  Results are indexed, so
/// the outcome is independent of scheduling.  The first exception (lowest
/// job index) is rethrown on the caller.
inline void run_jobs(int count, int threads, const std::function<void(int)>& job) {
    if (count <= 0) return;
    if (threads <= 1 || count == 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    const int workers = std::min(threads, count);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w]() {
            for (int i = w; i < count; i += workers) {
                try {
                    job(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Log level from ELLOPT_LOG (quiet | info | debug), default quiet.
LogLevel log_level();

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace ellopt
