#pragma once

#include <array>
#include <atomic>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "common/bytes.hpp"

namespace vauth::hid {

constexpr std::size_t kReportSize = 64;
constexpr std::size_t kInitDataSize = 57;
constexpr std::size_t kContDataSize = 59;
constexpr std::size_t kMaxContinuations = 128;
constexpr std::size_t kMaxPayload = kInitDataSize + kMaxContinuations * kContDataSize; // 7609

using Report = std::array<std::uint8_t, kReportSize>;

struct ChannelId {
    std::uint32_t value = 0;

    static constexpr ChannelId broadcast() { return ChannelId{0xFFFFFFFFu}; }
    static constexpr ChannelId reserved() { return ChannelId{0}; }

    constexpr bool is_broadcast() const { return value == 0xFFFFFFFFu; }
    constexpr bool is_reserved() const { return value == 0; }

    auto operator<=>(const ChannelId&) const = default;
};

std::string to_string(ChannelId cid);

struct InitializationPacket {
    ChannelId cid;
    std::uint8_t cmd = 0; // 7-bit command code, marker bit stripped
    std::uint16_t bcnt = 0;
    std::array<std::uint8_t, kInitDataSize> data{};

    bool operator==(const InitializationPacket&) const = default;
};

struct ContinuationPacket {
    ChannelId cid;
    std::uint8_t seq = 0;
    std::array<std::uint8_t, kContDataSize> data{};

    bool operator==(const ContinuationPacket&) const = default;
};

using Packet = std::variant<InitializationPacket, ContinuationPacket>;

ChannelId channel_of(const Packet& pkt);

struct AssembledMessage {
    ChannelId cid;
    std::uint8_t cmd = 0;
    Bytes payload;

    bool operator==(const AssembledMessage&) const = default;
};

enum class FramingErrorKind {
    bad_length,
    payload_too_large,
    unexpected_continuation,
    invalid_sequence,
    spurious_init,
};

class FramingError : public std::runtime_error {
public:
    FramingError(FramingErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {
    }
    FramingErrorKind kind() const noexcept { return kind_; }

private:
    FramingErrorKind kind_;
};

Packet parse_packet(ByteView raw);
Report serialize(const Packet& pkt);

/// Splits a payload into one initialization packet followed by continuation
/// packets numbered from 0. Throws FramingError(payload_too_large) above 7609 bytes.
std::vector<Packet> fragment(ChannelId cid, std::uint8_t cmd, ByteView payload);

std::size_t packet_count(std::size_t payload_size);

/// Collects packets into messages, at most one open message per channel.
class Reassembler {
public:
    struct Result {
        std::optional<AssembledMessage> message;
        std::optional<FramingError> error;
    };

    /// A complete message is returned once bcnt bytes are collected. An
    /// initialization packet arriving on a channel with an open message
    /// restarts assembly and also reports spurious_init.
    Result push(const Packet& pkt);

    bool has_open(ChannelId cid) const { return open_.contains(cid); }
    void abort(ChannelId cid) { open_.erase(cid); }
    void clear() { open_.clear(); }

private:
    struct Partial {
        std::uint8_t cmd = 0;
        std::uint16_t bcnt = 0;
        std::uint8_t next_seq = 0;
        Bytes payload;
    };

    std::map<ChannelId, Partial> open_;
};

class ChannelAllocationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Hands out channel ids 1..0xFFFFFFFE, each at most once. Thread-safe.
class ChannelAllocator {
public:
    explicit ChannelAllocator(std::uint32_t first = 1) : next_(first) {}

    ChannelId allocate();

private:
    std::atomic<std::uint64_t> next_;
};

} // namespace vauth::hid
