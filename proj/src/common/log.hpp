#pragma once

#include <string_view>

namespace vauth {

enum class LogSink { debug, usbhid, ctap, auth };

const char* sink_name(LogSink s);

class Logger {
public:
    virtual ~Logger() = default;
    /// Must not throw.
    virtual void log(LogSink sink, std::string_view record) noexcept = 0;
};

/// Discards everything.
Logger& null_logger();

} // namespace vauth
