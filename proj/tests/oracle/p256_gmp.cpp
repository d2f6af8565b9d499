#include "p256_gmp.hpp"

#include <array>
#include <cstring>

namespace oracle {

mpz_class from_be(const Bytes& b)
{
    mpz_class v;
    if (!b.empty())
        mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
    return v;
}

Bytes to_be(const mpz_class& v, std::size_t len)
{
    Bytes out(len, 0);
    std::size_t count = 0;
    Bytes tmp((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8 + 1);
    mpz_export(tmp.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
    if (count > len)
        count = len;
    std::memcpy(out.data() + (len - count), tmp.data(), count);
    return out;
}

const mpz_class& p256_p()
{
    static const mpz_class p("ffffffff00000001000000000000000000000000ffffffffffffffffffffffff", 16);
    return p;
}

const mpz_class& p256_n()
{
    static const mpz_class n("ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551", 16);
    return n;
}

static const mpz_class& p256_b()
{
    static const mpz_class b("5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b", 16);
    return b;
}

Point p256_g()
{
    return Point{mpz_class("6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296", 16),
                 mpz_class("4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5", 16), false};
}

static mpz_class mod(const mpz_class& a, const mpz_class& m)
{
    mpz_class r = a % m;
    if (r < 0)
        r += m;
    return r;
}

static mpz_class inv(const mpz_class& a, const mpz_class& m)
{
    mpz_class r;
    mpz_invert(r.get_mpz_t(), mod(a, m).get_mpz_t(), m.get_mpz_t());
    return r;
}

bool on_curve(const Point& pt)
{
    if (pt.infinity)
        return false;
    const auto& p = p256_p();
    if (pt.x < 0 || pt.x >= p || pt.y < 0 || pt.y >= p)
        return false;
    mpz_class lhs = mod(pt.y * pt.y, p);
    mpz_class rhs = mod(pt.x * pt.x * pt.x - 3 * pt.x + p256_b(), p);
    return lhs == rhs;
}

Point add(const Point& a, const Point& b)
{
    const auto& p = p256_p();
    if (a.infinity)
        return b;
    if (b.infinity)
        return a;
    mpz_class lambda;
    if (a.x == b.x) {
        if (mod(a.y + b.y, p) == 0)
            return Point{0, 0, true};
        lambda = mod((3 * a.x * a.x - 3) * inv(2 * a.y, p), p);
    } else {
        lambda = mod((b.y - a.y) * inv(b.x - a.x, p), p);
    }
    mpz_class x = mod(lambda * lambda - a.x - b.x, p);
    mpz_class y = mod(lambda * (a.x - x) - a.y, p);
    return Point{x, y, false};
}

Point mul(const mpz_class& k, const Point& pt)
{
    Point result{0, 0, true};
    Point addend = pt;
    mpz_class e = k;
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t()))
            result = add(result, addend);
        addend = add(addend, addend);
        e >>= 1;
    }
    return result;
}

bool ecdsa_verify(const Point& pub, const Bytes& digest, const mpz_class& r, const mpz_class& s)
{
    const auto& n = p256_n();
    if (!on_curve(pub) || r <= 0 || r >= n || s <= 0 || s >= n)
        return false;
    mpz_class e = from_be(digest);
    mpz_class w = inv(s, n);
    mpz_class u1 = mod(e * w, n);
    mpz_class u2 = mod(r * w, n);
    Point x = add(mul(u1, p256_g()), mul(u2, pub));
    if (x.infinity)
        return false;
    return mod(x.x, n) == r;
}

std::optional<std::pair<mpz_class, mpz_class>> parse_der_signature(const Bytes& der)
{
    std::size_t i = 0;
    auto byte = [&](std::uint8_t& out) {
        if (i >= der.size())
            return false;
        out = der[i++];
        return true;
    };
    std::uint8_t tag = 0, len = 0;
    if (!byte(tag) || tag != 0x30 || !byte(len) || len & 0x80 || len != der.size() - 2)
        return std::nullopt;
    std::array<mpz_class, 2> ints;
    for (auto& v : ints) {
        std::uint8_t ilen = 0;
        if (!byte(tag) || tag != 0x02 || !byte(ilen) || ilen == 0 || ilen > 33 || i + ilen > der.size())
            return std::nullopt;
        Bytes body(der.begin() + static_cast<long>(i), der.begin() + static_cast<long>(i + ilen));
        if (body[0] & 0x80)
            return std::nullopt; // negative
        if (body.size() > 1 && body[0] == 0 && !(body[1] & 0x80))
            return std::nullopt; // non-minimal
        v = from_be(body);
        i += ilen;
    }
    if (i != der.size())
        return std::nullopt;
    return std::make_pair(ints[0], ints[1]);
}

bool ecdsa_verify_der(const Point& pub, const Bytes& digest, const Bytes& der)
{
    auto rs = parse_der_signature(der);
    return rs && ecdsa_verify(pub, digest, rs->first, rs->second);
}

Bytes ecdh_x(const mpz_class& d, const Point& peer) { return to_be(mul(d, peer).x); }

namespace {

constexpr std::array<std::uint32_t, 64> K = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

} // namespace

Bytes sha256(const Bytes& data)
{
    std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                      0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    Bytes msg = data;
    std::uint64_t bits = static_cast<std::uint64_t>(data.size()) * 8;
    msg.push_back(0x80);
    while (msg.size() % 64 != 56)
        msg.push_back(0);
    for (int i = 7; i >= 0; --i)
        msg.push_back(static_cast<std::uint8_t>(bits >> (i * 8)));
    for (std::size_t off = 0; off < msg.size(); off += 64) {
        std::array<std::uint32_t, 64> w{};
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(msg[off + 4 * i]) << 24) | (std::uint32_t(msg[off + 4 * i + 1]) << 16) |
                   (std::uint32_t(msg[off + 4 * i + 2]) << 8) | msg[off + 4 * i + 3];
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto [a, b, c, d, e, f, g, hh] = h;
        for (int i = 0; i < 64; ++i) {
            std::uint32_t t1 = hh + (rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25)) + ((e & f) ^ (~e & g)) + K[i] + w[i];
            std::uint32_t t2 = (rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22)) + ((a & b) ^ (a & c) ^ (b & c));
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }
    Bytes out;
    for (auto v : h)
        for (int i = 3; i >= 0; --i)
            out.push_back(static_cast<std::uint8_t>(v >> (i * 8)));
    return out;
}

} // namespace oracle
