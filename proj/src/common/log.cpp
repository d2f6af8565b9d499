#include "common/log.hpp"

namespace vauth {

namespace {
class NullLogger : public Logger {
public:
    void log(LogSink, std::string_view) noexcept override {}
};
} // namespace

const char* sink_name(LogSink s)
{
    switch (s) {
    case LogSink::debug: return "debug";
    case LogSink::usbhid: return "usbhid";
    case LogSink::ctap: return "ctap";
    case LogSink::auth: return "auth";
    }
    return "unknown";
}

Logger& null_logger()
{
    static NullLogger logger;
    return logger;
}

} // namespace vauth
