#pragma once

#include <string>

namespace vauth {

/// Local time as YYYYMMDD_HHMMSS_mmm, used to name per-run log files.
std::string file_timestamp();

/// UTC time in ISO-8601 with milliseconds, for log records.
std::string iso_timestamp();

} // namespace vauth
