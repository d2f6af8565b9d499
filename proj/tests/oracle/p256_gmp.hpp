#pragma once

// P-256 arithmetic on GMP integers, used only to check the OpenSSL-backed code.

#include <cstdint>
#include <optional>
#include <vector>

#include <gmpxx.h>

namespace oracle {

using Bytes = std::vector<std::uint8_t>;

struct Point {
    mpz_class x, y;
    bool infinity = false;
};

mpz_class from_be(const Bytes& b);
Bytes to_be(const mpz_class& v, std::size_t len = 32);

const mpz_class& p256_p();
const mpz_class& p256_n();
Point p256_g();

bool on_curve(const Point& pt);
Point add(const Point& a, const Point& b);
Point mul(const mpz_class& k, const Point& pt);

/// ECDSA verification over a 32-byte digest; r and s as integers.
bool ecdsa_verify(const Point& pub, const Bytes& digest, const mpz_class& r, const mpz_class& s);
/// Same, with a DER-encoded signature; false for malformed DER.
bool ecdsa_verify_der(const Point& pub, const Bytes& digest, const Bytes& der);
/// x-coordinate of d * peer, 32 bytes.
Bytes ecdh_x(const mpz_class& d, const Point& peer);

/// Minimal strict DER parse of SEQUENCE { INTEGER r, INTEGER s }.
std::optional<std::pair<mpz_class, mpz_class>> parse_der_signature(const Bytes& der);

/// FIPS 180-4 SHA-256, written out so that digests do not come from OpenSSL either.
Bytes sha256(const Bytes& data);

} // namespace oracle
