#include <random>

#include <gtest/gtest.h>

#include "hid/packet.hpp"
#include "support/test_util.hpp"

using namespace vauth;
using namespace vauth::hid;

namespace {

AssembledMessage round_trip(ChannelId cid, std::uint8_t cmd, const Bytes& payload)
{
    Reassembler r;
    auto packets = fragment(cid, cmd, payload);
    for (std::size_t i = 0; i < packets.size(); ++i) {
        auto res = r.push(parse_packet(serialize(packets[i])));
        EXPECT_FALSE(res.error) << res.error->what();
        if (i + 1 < packets.size())
            EXPECT_FALSE(res.message);
        else if (res.message)
            return *res.message;
    }
    ADD_FAILURE() << "no message assembled";
    return {};
}

} // namespace

TEST(PacketCount, MatchesFormulaAtBoundaries)
{
    EXPECT_EQ(packet_count(0), 1u);
    EXPECT_EQ(packet_count(57), 1u);
    EXPECT_EQ(packet_count(58), 2u);
    EXPECT_EQ(packet_count(116), 2u);
    EXPECT_EQ(packet_count(117), 3u);
    EXPECT_EQ(packet_count(7609), 129u);
}

TEST(Fragment, InitPacketLayout)
{
    Bytes payload(60, 0xAB);
    auto packets = fragment(ChannelId{0x01020304}, 0x10, payload);
    ASSERT_EQ(packets.size(), 2u);
    Report r0 = serialize(packets[0]);
    EXPECT_EQ(to_hex(ByteView(r0.data(), 7)), "0102030490003c");
    Report r1 = serialize(packets[1]);
    EXPECT_EQ(to_hex(ByteView(r1.data(), 8)), "0102030400ababab");
    EXPECT_EQ(r1[8], 0x00); // zero padding after the last data byte
}

TEST(Fragment, RejectsOversizedPayload)
{
    Bytes payload(7610);
    try {
        fragment(ChannelId{1}, 0x01, payload);
        FAIL();
    } catch (const FramingError& e) {
        EXPECT_EQ(e.kind(), FramingErrorKind::payload_too_large);
    }
}

TEST(Fragment, SequenceNumbersCountFromZero)
{
    auto packets = fragment(ChannelId{7}, 0x01, Bytes(7609, 1));
    ASSERT_EQ(packets.size(), 129u);
    for (std::size_t i = 1; i < packets.size(); ++i)
        EXPECT_EQ(std::get<ContinuationPacket>(packets[i]).seq, i - 1);
}

TEST(RoundTrip, BoundaryLengthsAndRandomLengths)
{
    std::mt19937 rng(1234);
    std::vector<std::size_t> lengths = {0, 1, 56, 57, 58, 115, 116, 117, 7608, 7609};
    for (int i = 0; i < 200; ++i)
        lengths.push_back(rng() % 7610);
    for (auto n : lengths) {
        Bytes payload = test::random_payload(rng, n);
        auto msg = round_trip(ChannelId{0xCAFEBABE}, 0x03, payload);
        EXPECT_EQ(msg.payload, payload) << "length " << n;
        EXPECT_EQ(msg.cmd, 0x03);
        EXPECT_EQ(msg.cid, ChannelId{0xCAFEBABE});
    }
}

TEST(ParsePacket, RejectsWrongSizes)
{
    for (std::size_t n : {0u, 63u, 65u}) {
        try {
            parse_packet(Bytes(n));
            FAIL() << n;
        } catch (const FramingError& e) {
            EXPECT_EQ(e.kind(), FramingErrorKind::bad_length);
        }
    }
}

TEST(ParsePacket, SerializeIsInverse)
{
    std::mt19937 rng(7);
    for (int i = 0; i < 500; ++i) {
        Bytes raw = test::random_payload(rng, 64);
        if (!(raw[4] & 0x80))
            raw[4] &= 0x7F;
        Report r = serialize(parse_packet(raw));
        EXPECT_EQ(Bytes(r.begin(), r.end()), raw);
    }
}

TEST(Reassembler, WrongSequenceAbortsMessage)
{
    Reassembler r;
    auto packets = fragment(ChannelId{5}, 0x10, Bytes(200, 9));
    r.push(packets[0]);
    auto bad = std::get<ContinuationPacket>(packets[2]);
    auto res = r.push(bad);
    ASSERT_TRUE(res.error);
    EXPECT_EQ(res.error->kind(), FramingErrorKind::invalid_sequence);
    EXPECT_FALSE(r.has_open(ChannelId{5}));
}

TEST(Reassembler, ContinuationWithoutInit)
{
    Reassembler r;
    auto res = r.push(ContinuationPacket{ChannelId{5}, 0, {}});
    ASSERT_TRUE(res.error);
    EXPECT_EQ(res.error->kind(), FramingErrorKind::unexpected_continuation);
}

TEST(Reassembler, SpuriousInitRestartsAssembly)
{
    Reassembler r;
    auto first = fragment(ChannelId{5}, 0x10, Bytes(100, 1));
    r.push(first[0]);
    auto res = r.push(fragment(ChannelId{5}, 0x01, Bytes(3, 2))[0]);
    ASSERT_TRUE(res.error);
    EXPECT_EQ(res.error->kind(), FramingErrorKind::spurious_init);
    ASSERT_TRUE(res.message);
    EXPECT_EQ(res.message->payload, Bytes(3, 2));
}

TEST(Reassembler, DeclaredLengthAboveLimit)
{
    Reassembler r;
    InitializationPacket init{ChannelId{9}, 0x01, 7610, {}};
    auto res = r.push(init);
    ASSERT_TRUE(res.error);
    EXPECT_EQ(res.error->kind(), FramingErrorKind::payload_too_large);
    EXPECT_FALSE(res.message);
}

TEST(Reassembler, InterleavedChannelsStaySeparate)
{
    Reassembler r;
    auto a = fragment(ChannelId{1}, 0x01, Bytes(150, 0xA));
    auto b = fragment(ChannelId{2}, 0x01, Bytes(150, 0xB));
    std::vector<AssembledMessage> done;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (auto* set : {&a, &b}) {
            auto res = r.push((*set)[i]);
            EXPECT_FALSE(res.error);
            if (res.message)
                done.push_back(*res.message);
        }
    }
    ASSERT_EQ(done.size(), 2u);
    EXPECT_EQ(done[0].payload, Bytes(150, 0xA));
    EXPECT_EQ(done[1].payload, Bytes(150, 0xB));
}

TEST(ChannelAllocator, NeverHandsOutReservedIds)
{
    ChannelAllocator a(0xFFFFFFFD);
    EXPECT_EQ(a.allocate().value, 0xFFFFFFFDu);
    EXPECT_EQ(a.allocate().value, 0xFFFFFFFEu);
    EXPECT_THROW(a.allocate(), ChannelAllocationError);
    ChannelAllocator z(0);
    EXPECT_EQ(z.allocate().value, 1u);
}
