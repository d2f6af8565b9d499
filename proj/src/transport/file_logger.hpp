#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <mutex>

#include "common/log.hpp"

namespace vauth::transport {

struct FileLoggerOptions {
    std::filesystem::path directory = "logs";
    bool mirror_stdout = true;
};

/// One file per sink (debug, usbhid, ctap, auth) in the log directory.
/// Files left by a previous run are renamed to <sink>_<timestamp>.log
/// first. Every record also lands in the debug file, which is mirrored to
/// stdout. A sink that cannot be opened or written falls back to stderr.
class FileLogger : public Logger {
public:
    explicit FileLogger(FileLoggerOptions options);
    ~FileLogger() override;
    FileLogger(const FileLogger&) = delete;
    FileLogger& operator=(const FileLogger&) = delete;

    void log(LogSink sink, std::string_view record) noexcept override;

    std::filesystem::path file_for(LogSink sink) const;

private:
    void write_line(LogSink sink, std::string_view line) noexcept;

    FileLoggerOptions options_;
    std::mutex mu_;
    std::array<std::FILE*, 4> files_{};
};

/// Renames <dir>/<sink>.log to <dir>/<sink>_<timestamp>.log for each sink present.
void archive_logs(const std::filesystem::path& directory);

} // namespace vauth::transport
