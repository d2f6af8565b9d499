#include "hid/packet.hpp"

#include <algorithm>
#include <cstdio>

namespace vauth::hid {

std::string to_string(ChannelId cid)
{
    char buf[11];
    std::snprintf(buf, sizeof buf, "0x%08X", cid.value);
    return buf;
}

ChannelId channel_of(const Packet& pkt)
{
    return std::visit([](const auto& p) { return p.cid; }, pkt);
}

Packet parse_packet(ByteView raw)
{
    if (raw.size() != kReportSize)
        throw FramingError(FramingErrorKind::bad_length,
                           "HID report must be 64 bytes, got " + std::to_string(raw.size()));
    ChannelId cid{get_u32_be(raw.data())};
    if (raw[4] & 0x80) {
        InitializationPacket pkt;
        pkt.cid = cid;
        pkt.cmd = raw[4] & 0x7F;
        pkt.bcnt = static_cast<std::uint16_t>((raw[5] << 8) | raw[6]);
        std::copy_n(raw.begin() + 7, kInitDataSize, pkt.data.begin());
        return pkt;
    }
    ContinuationPacket pkt;
    pkt.cid = cid;
    pkt.seq = raw[4];
    std::copy_n(raw.begin() + 5, kContDataSize, pkt.data.begin());
    return pkt;
}

Report serialize(const Packet& pkt)
{
    Report out{};
    auto put_cid = [&](ChannelId cid) {
        out[0] = static_cast<std::uint8_t>(cid.value >> 24);
        out[1] = static_cast<std::uint8_t>(cid.value >> 16);
        out[2] = static_cast<std::uint8_t>(cid.value >> 8);
        out[3] = static_cast<std::uint8_t>(cid.value);
    };
    if (const auto* init = std::get_if<InitializationPacket>(&pkt)) {
        put_cid(init->cid);
        out[4] = static_cast<std::uint8_t>(init->cmd | 0x80);
        out[5] = static_cast<std::uint8_t>(init->bcnt >> 8);
        out[6] = static_cast<std::uint8_t>(init->bcnt);
        std::copy(init->data.begin(), init->data.end(), out.begin() + 7);
    } else {
        const auto& cont = std::get<ContinuationPacket>(pkt);
        put_cid(cont.cid);
        out[4] = static_cast<std::uint8_t>(cont.seq & 0x7F);
        std::copy(cont.data.begin(), cont.data.end(), out.begin() + 5);
    }
    return out;
}

std::size_t packet_count(std::size_t payload_size)
{
    if (payload_size <= kInitDataSize)
        return 1;
    return 1 + (payload_size - kInitDataSize + kContDataSize - 1) / kContDataSize;
}

std::vector<Packet> fragment(ChannelId cid, std::uint8_t cmd, ByteView payload)
{
    if (payload.size() > kMaxPayload)
        throw FramingError(FramingErrorKind::payload_too_large,
                           "payload of " + std::to_string(payload.size()) + " bytes exceeds 7609");
    std::vector<Packet> out;
    out.reserve(packet_count(payload.size()));

    InitializationPacket init;
    init.cid = cid;
    init.cmd = cmd & 0x7F;
    init.bcnt = static_cast<std::uint16_t>(payload.size());
    std::size_t n = std::min(payload.size(), kInitDataSize);
    std::copy_n(payload.begin(), n, init.data.begin());
    out.emplace_back(init);

    std::uint8_t seq = 0;
    for (std::size_t off = n; off < payload.size(); off += kContDataSize) {
        ContinuationPacket cont;
        cont.cid = cid;
        cont.seq = seq++;
        std::size_t chunk = std::min(payload.size() - off, kContDataSize);
        std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(off), chunk, cont.data.begin());
        out.emplace_back(cont);
    }
    return out;
}

Reassembler::Result Reassembler::push(const Packet& pkt)
{
    Result result;
    if (const auto* init = std::get_if<InitializationPacket>(&pkt)) {
        if (open_.erase(init->cid) > 0)
            result.error = FramingError(FramingErrorKind::spurious_init,
                                        "initialization packet on " + to_string(init->cid) +
                                            " aborted an incomplete message");
        if (init->bcnt > kMaxPayload) {
            result.error = FramingError(FramingErrorKind::payload_too_large,
                                        "declared bcnt " + std::to_string(init->bcnt) +
                                            " exceeds 7609");
            return result;
        }
        std::size_t n = std::min<std::size_t>(init->bcnt, kInitDataSize);
        Partial partial{init->cmd, init->bcnt, 0, Bytes(init->data.begin(), init->data.begin() + n)};
        if (partial.payload.size() == partial.bcnt) {
            result.message = AssembledMessage{init->cid, partial.cmd, std::move(partial.payload)};
            return result;
        }
        partial.payload.reserve(init->bcnt);
        open_.emplace(init->cid, std::move(partial));
        return result;
    }

    const auto& cont = std::get<ContinuationPacket>(pkt);
    auto it = open_.find(cont.cid);
    if (it == open_.end()) {
        result.error = FramingError(FramingErrorKind::unexpected_continuation,
                                    "continuation on " + to_string(cont.cid) +
                                        " without an open message");
        return result;
    }
    Partial& partial = it->second;
    if (cont.seq != partial.next_seq) {
        result.error = FramingError(FramingErrorKind::invalid_sequence,
                                    "expected seq " + std::to_string(partial.next_seq) + ", got " +
                                        std::to_string(cont.seq));
        open_.erase(it);
        return result;
    }
    ++partial.next_seq;
    std::size_t n = std::min<std::size_t>(partial.bcnt - partial.payload.size(), kContDataSize);
    partial.payload.insert(partial.payload.end(), cont.data.begin(), cont.data.begin() + n);
    if (partial.payload.size() == partial.bcnt) {
        result.message = AssembledMessage{cont.cid, partial.cmd, std::move(partial.payload)};
        open_.erase(it);
    }
    return result;
}

ChannelId ChannelAllocator::allocate()
{
    std::uint64_t v = next_.fetch_add(1);
    if (v == 0)
        v = next_.fetch_add(1);
    if (v >= 0xFFFFFFFFull)
        throw ChannelAllocationError("channel id space exhausted");
    return ChannelId{static_cast<std::uint32_t>(v)};
}

} // namespace vauth::hid
