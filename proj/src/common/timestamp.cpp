#include "common/timestamp.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace vauth {

namespace {

struct Now {
    std::tm tm{};
    int millis = 0;
};

Now now(bool utc)
{
    auto tp = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(tp);
    Now n;
    if (utc)
        gmtime_r(&t, &n.tm);
    else
        localtime_r(&t, &n.tm);
    n.millis = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count() % 1000);
    return n;
}

} // namespace

std::string file_timestamp()
{
    Now n = now(false);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d%02d%02d_%02d%02d%02d_%03d", n.tm.tm_year + 1900, n.tm.tm_mon + 1,
                  n.tm.tm_mday, n.tm.tm_hour, n.tm.tm_min, n.tm.tm_sec, n.millis);
    return buf;
}

std::string iso_timestamp()
{
    Now n = now(true);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", n.tm.tm_year + 1900, n.tm.tm_mon + 1,
                  n.tm.tm_mday, n.tm.tm_hour, n.tm.tm_min, n.tm.tm_sec, n.millis);
    return buf;
}

} // namespace vauth
