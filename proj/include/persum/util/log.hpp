#pragma once

#include <iostream>
#include <mutex>
#include <string_view>

namespace persum {

/// Diagnostics go to stderr so outputs on stdout/files stay byte-stable.
inline void log_warning(std::string_view msg) {
    static std::mutex mu;
    std::lock_guard lk(mu);
    std::cerr << "warning: " << msg << '\n';
}

} // namespace persum
