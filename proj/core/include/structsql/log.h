#pragma once

#include <functional>
#include <string_view>

namespace structsql {

enum class LogLevel { Info, Warning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replaces the process-wide sink and returns the previous one. The default
/// sink writes warnings to stderr and drops info messages.
LogSink set_log_sink(LogSink sink);

void log_message(LogLevel level, std::string_view message);
inline void log_warning(std::string_view message) { log_message(LogLevel::Warning, message); }
inline void log_info(std::string_view message) { log_message(LogLevel::Info, message); }

}  // namespace structsql
