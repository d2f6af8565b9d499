#include <random>

#include <gtest/gtest.h>

#include "cbor/cbor.hpp"

using namespace vauth;
using namespace vauth::cbor;

namespace {

std::string enc(const Value& v) { return to_hex(encode(v)); }

Value random_value(std::mt19937& rng, int depth)
{
    int kind = static_cast<int>(rng() % (depth > 3 ? 5 : 7));
    switch (kind) {
    case 0: {
        std::int64_t mag = static_cast<std::int64_t>(rng()) << (rng() % 32);
        return Value(rng() % 2 ? mag : -mag - 1);
    }
    case 1: {
        Bytes b(rng() % 40);
        for (auto& x : b)
            x = static_cast<std::uint8_t>(rng());
        return Value(b);
    }
    case 2: {
        std::string s(rng() % 30, 'x');
        for (auto& c : s)
            c = static_cast<char>('a' + rng() % 26);
        return Value(s);
    }
    case 3: return Value(rng() % 2 == 0);
    case 4: return Value(Null{});
    case 5: {
        Array a;
        for (std::size_t i = rng() % 5; i > 0; --i)
            a.push_back(random_value(rng, depth + 1));
        return Value(a);
    }
    default: {
        Map m;
        for (std::size_t i = rng() % 5; i > 0; --i) {
            Value k = rng() % 2 ? Value(static_cast<std::int64_t>(rng() % 1000) - 500)
                                : Value(std::string(1 + rng() % 4, static_cast<char>('a' + rng() % 26)));
            bool dup = false;
            for (auto& [ek, _] : m)
                dup = dup || ek == k;
            if (!dup)
                m.emplace_back(k, random_value(rng, depth + 1));
        }
        return Value(m);
    }
    }
}

DecodeErrorKind decode_error(const std::string& hex)
{
    try {
        decode(from_hex(hex));
    } catch (const DecodeError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "decoded " << hex;
    return DecodeErrorKind::malformed;
}

} // namespace

TEST(CborEncode, IntegerHeads)
{
    EXPECT_EQ(enc(0), "00");
    EXPECT_EQ(enc(23), "17");
    EXPECT_EQ(enc(24), "1818");
    EXPECT_EQ(enc(100), "1864");
    EXPECT_EQ(enc(1000), "1903e8");
    EXPECT_EQ(enc(1000000), "1a000f4240");
    EXPECT_EQ(enc(std::int64_t{1000000000000}), "1b000000e8d4a51000");
    EXPECT_EQ(enc(-1), "20");
    EXPECT_EQ(enc(-10), "29");
    EXPECT_EQ(enc(-100), "3863");
    EXPECT_EQ(enc(-1000), "3903e7");
    EXPECT_EQ(enc(std::numeric_limits<std::int64_t>::min()), "3b7fffffffffffffff");
}

TEST(CborEncode, StringsArraysAndSimpleValues)
{
    EXPECT_EQ(enc(""), "60");
    EXPECT_EQ(enc("IETF"), "6449455446");
    EXPECT_EQ(enc(Bytes{}), "40");
    EXPECT_EQ(enc(Bytes{1, 2, 3, 4}), "4401020304");
    EXPECT_EQ(enc(Array{}), "80");
    EXPECT_EQ(enc(Array{1, Array{2, 3}, Array{4, 5}}), "8301820203820405");
    EXPECT_EQ(enc(true), "f5");
    EXPECT_EQ(enc(false), "f4");
    EXPECT_EQ(enc(Null{}), "f6");
    EXPECT_EQ(enc(Map{{"a", 1}, {"b", Array{2, 3}}}), "a26161016162820203");
}

TEST(CborEncode, CanonicalMapOrder)
{
    // Shorter encoded keys first, then bytewise.
    Map m{{"aa", 1}, {"b", 2}, {-1, 4}, {10, 3}};
    EXPECT_EQ(enc(m), "a40a03200461620262616101");
    Map n{{3, "c"}, {1, "a"}, {2, "b"}};
    EXPECT_EQ(enc(n), "a3016161026162036163");
}

TEST(CborDecode, RoundTripRandomValues)
{
    std::mt19937 rng(99);
    for (int i = 0; i < 2000; ++i) {
        Value v = random_value(rng, 0);
        Bytes e = encode(v);
        Value d = decode(e);
        EXPECT_EQ(encode(d), e);
    }
}

TEST(CborDecode, AcceptsNonCanonicalHeads)
{
    EXPECT_EQ(decode(from_hex("1800")).as_int(), 0);
}

TEST(CborDecode, RejectsUnsupportedItems)
{
    EXPECT_EQ(decode_error("f93c00"), DecodeErrorKind::unsupported);         // half float
    EXPECT_EQ(decode_error("c074323031332d30332d3231"), DecodeErrorKind::unsupported); // tag 0
    EXPECT_EQ(decode_error("5f42010243030405ff"), DecodeErrorKind::unsupported);     // indefinite bytes
    EXPECT_EQ(decode_error("1bffffffffffffffff"), DecodeErrorKind::unsupported);     // > int64
}

TEST(CborDecode, RejectsMalformedInput)
{
    EXPECT_EQ(decode_error(""), DecodeErrorKind::malformed);
    EXPECT_EQ(decode_error("19"), DecodeErrorKind::malformed);
    EXPECT_EQ(decode_error("4401"), DecodeErrorKind::malformed);
    EXPECT_EQ(decode_error("8301020304"), DecodeErrorKind::trailing_data);
    EXPECT_EQ(decode_error("a201010102"), DecodeErrorKind::malformed); // duplicate key
    EXPECT_EQ(decode_error("1c"), DecodeErrorKind::malformed);
    EXPECT_EQ(decode_error("9bffffffffffffffff"), DecodeErrorKind::malformed);
}

TEST(CborDecode, NestingLimit)
{
    std::string deep(2 * 200, '8');
    for (std::size_t i = 1; i < deep.size(); i += 2)
        deep[i] = '1';
    deep += "00";
    EXPECT_EQ(decode_error(deep), DecodeErrorKind::too_deep);
}

TEST(CborDecode, PrefixReportsConsumedBytes)
{
    auto [v, n] = decode_prefix(from_hex("8201020304"));
    EXPECT_EQ(n, 3u);
    EXPECT_EQ(v, Value(Array{1, 2}));
}

TEST(CborValue, FindAndTypeErrors)
{
    Value m(Map{{1, "x"}});
    ASSERT_NE(m.find(1), nullptr);
    EXPECT_EQ(m.find(2), nullptr);
    EXPECT_EQ(Value(5).find(1), nullptr);
    EXPECT_THROW(Value(5).as_text(), TypeError);
}

TEST(CborDecode, MutatedInputNeverCrashes)
{
    std::mt19937 rng(5);
    for (int i = 0; i < 3000; ++i) {
        Bytes e = encode(random_value(rng, 0));
        if (e.empty())
            continue;
        e[rng() % e.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        try {
            decode(e);
        } catch (const DecodeError&) {
        }
    }
}
