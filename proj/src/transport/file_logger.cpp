#include "transport/file_logger.hpp"

#include <string>

#include "common/timestamp.hpp"

namespace vauth::transport {

namespace {

constexpr std::array<LogSink, 4> kSinks = {LogSink::debug, LogSink::usbhid, LogSink::ctap, LogSink::auth};

std::size_t index_of(LogSink s) { return static_cast<std::size_t>(s); }

} // namespace

void archive_logs(const std::filesystem::path& directory)
{
    std::error_code ec;
    std::string ts = file_timestamp();
    for (LogSink s : kSinks) {
        auto current = directory / (std::string(sink_name(s)) + ".log");
        if (!std::filesystem::exists(current, ec))
            continue;
        auto target = directory / (std::string(sink_name(s)) + "_" + ts + ".log");
        for (int n = 1; std::filesystem::exists(target, ec); ++n)
            target = directory / (std::string(sink_name(s)) + "_" + ts + "-" + std::to_string(n) + ".log");
        std::filesystem::rename(current, target, ec);
    }
}

FileLogger::FileLogger(FileLoggerOptions options) : options_(std::move(options))
{
    std::error_code ec;
    std::filesystem::create_directories(options_.directory, ec);
    archive_logs(options_.directory);
    for (LogSink s : kSinks) {
        files_[index_of(s)] = std::fopen(file_for(s).c_str(), "a");
        if (!files_[index_of(s)])
            std::fprintf(stderr, "vauth: cannot open log file %s, using stderr\n", file_for(s).c_str());
    }
}

FileLogger::~FileLogger()
{
    for (auto*& f : files_) {
        if (f)
            std::fclose(f);
        f = nullptr;
    }
}

std::filesystem::path FileLogger::file_for(LogSink sink) const
{
    return options_.directory / (std::string(sink_name(sink)) + ".log");
}

void FileLogger::write_line(LogSink sink, std::string_view line) noexcept
{
    std::FILE* f = files_[index_of(sink)];
    if (f && std::fwrite(line.data(), 1, line.size(), f) == line.size() && std::fputc('\n', f) != EOF) {
        std::fflush(f);
        return;
    }
    std::fprintf(stderr, "[%s] %.*s\n", sink_name(sink), static_cast<int>(line.size()), line.data());
}

void FileLogger::log(LogSink sink, std::string_view record) noexcept
{
    try {
        std::string stamp = iso_timestamp();
        std::string debug_line = stamp + " [" + sink_name(sink) + "] " + std::string(record);
        std::lock_guard lock(mu_);
        if (sink != LogSink::debug) {
            if (sink == LogSink::usbhid)
                write_line(sink, record);
            else
                write_line(sink, stamp + " " + std::string(record));
        }
        write_line(LogSink::debug, debug_line);
        if (options_.mirror_stdout) {
            std::fwrite(debug_line.data(), 1, debug_line.size(), stdout);
            std::fputc('\n', stdout);
            std::fflush(stdout);
        }
    } catch (...) {
    }
}

} // namespace vauth::transport
