#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vauth {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

inline Bytes concat(ByteView a, ByteView b)
{
    Bytes out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline void append(Bytes& dst, ByteView src) { dst.insert(dst.end(), src.begin(), src.end()); }

inline void put_u16_be(Bytes& dst, std::uint16_t v)
{
    dst.push_back(static_cast<std::uint8_t>(v >> 8));
    dst.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32_be(Bytes& dst, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        dst.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline void put_u64_be(Bytes& dst, std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        dst.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline std::uint32_t get_u32_be(const std::uint8_t* p)
{
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
}

inline std::uint64_t get_u64_be(const std::uint8_t* p)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v = (v << 8) | p[i];
    return v;
}

std::string to_hex(ByteView b);

/// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

} // namespace vauth
