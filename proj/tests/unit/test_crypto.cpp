#include <random>

#include <gtest/gtest.h>

#include "crypto/credential_wrapper.hpp"
#include "crypto/es256_provider.hpp"
#include "crypto/key_wrap.hpp"
#include "crypto/p256.hpp"
#include "crypto/primitives.hpp"
#include "crypto/provider.hpp"
#include "ctap2/cose.hpp"
#include "openssl_oracle.hpp"
#include "p256_gmp.hpp"
#include "support/test_util.hpp"
#include "sym_oracle.hpp"

using namespace vauth;
using namespace vauth::crypto;

namespace {

oracle::Point to_oracle(const EcPoint& p) { return {oracle::from_be(p.x), oracle::from_be(p.y), false}; }

} // namespace

TEST(Primitives, AgreeWithOracle)
{
    std::mt19937 rng(1);
    for (int i = 0; i < 50; ++i) {
        Bytes data = test::random_payload(rng, rng() % 300);
        Bytes key = test::random_payload(rng, rng() % 100);
        EXPECT_EQ(sha256_bytes(data), oracle::sha256(data));
        EXPECT_EQ(hmac_sha256(key, data), oracle::hmac_sha256(key, data));
    }
}

TEST(Primitives, AesCbcAgreesWithOracle)
{
    std::mt19937 rng(2);
    for (int i = 0; i < 30; ++i) {
        Bytes k256 = test::random_payload(rng, 32), k128 = test::random_payload(rng, 16);
        Bytes iv = test::random_payload(rng, 16);
        Bytes blocks = test::random_payload(rng, 16 * (1 + rng() % 5));
        EXPECT_EQ(aes256_cbc_encrypt(k256, iv, blocks), oracle::aes_cbc_encrypt(k256, iv, blocks));
        EXPECT_EQ(aes256_cbc_decrypt(k256, iv, blocks), oracle::aes_cbc_decrypt(k256, iv, blocks));
        Bytes msg = test::random_payload(rng, rng() % 70);
        Bytes ct = aes128_cbc_pkcs7_encrypt(k128, iv, msg);
        EXPECT_EQ(ct, oracle::aes_cbc_encrypt(k128, iv, oracle::pkcs7_pad(msg)));
        EXPECT_EQ(aes128_cbc_pkcs7_decrypt(k128, iv, ct), msg);
    }
}

TEST(Primitives, Pbkdf2Rfc7914Vector)
{
    Bytes out = pbkdf2_sha256("passwd", to_bytes("salt"), 1, 64);
    EXPECT_EQ(to_hex(out), "55ac046e56e3089fec1691c22544b605f94185216dde0465e68b9d57c20dacbc"
                           "49ca9cccf179b645991664b39d77ef317c71b845b1e30bd509112041d3a19783");
}

TEST(Primitives, GcmOpenRejectsTampering)
{
    Bytes key(32, 1), nonce(12, 2), aad = to_bytes("aad");
    Bytes sealed = aes256_gcm_seal(key, nonce, aad, to_bytes("secret"));
    EXPECT_EQ(aes256_gcm_open(key, nonce, aad, sealed), to_bytes("secret"));
    sealed[0] ^= 1;
    EXPECT_FALSE(aes256_gcm_open(key, nonce, aad, sealed));
    sealed[0] ^= 1;
    EXPECT_FALSE(aes256_gcm_open(key, nonce, to_bytes("aaD"), sealed));
}

TEST(Primitives, ConstantTimeEqual)
{
    EXPECT_TRUE(constant_time_equal(Bytes{1, 2}, Bytes{1, 2}));
    EXPECT_FALSE(constant_time_equal(Bytes{1, 2}, Bytes{1, 3}));
    EXPECT_FALSE(constant_time_equal(Bytes{1, 2}, Bytes{1}));
}

TEST(KeyWrap, Rfc5649Vectors)
{
    Bytes kek = from_hex("5840df6e29b02af1ab493b705bf16ea1ae8338f4dcc176a8");
    EXPECT_EQ(to_hex(aes_key_wrap_pad(kek, from_hex("c37b7e6492584340bed12207808941155068f738"))),
              "138bdeaa9b8fa7fc61f97742e72248ee5ae6ae5360d1ae6a5f54f373fa543b6a");
    EXPECT_EQ(to_hex(aes_key_wrap_pad(kek, from_hex("466f7250617369"))), "afbeb0f07dfbf5419200f2ccb50bb24f");
    EXPECT_EQ(aes_key_unwrap_pad(kek, from_hex("afbeb0f07dfbf5419200f2ccb50bb24f")), from_hex("466f7250617369"));
}

TEST(KeyWrap, AgreesWithOpenSslForAllSmallLengths)
{
    std::mt19937 rng(3);
    for (std::size_t kek_len : {16u, 24u, 32u}) {
        for (std::size_t n = 1; n <= 80; ++n) {
            Bytes kek = test::random_payload(rng, kek_len);
            Bytes pt = test::random_payload(rng, n);
            Bytes ours = aes_key_wrap_pad(kek, pt);
            EXPECT_EQ(ours, oracle::openssl_wrap_pad(kek, pt)) << "len " << n;
            EXPECT_EQ(aes_key_unwrap_pad(kek, ours), pt);
            EXPECT_EQ(oracle::openssl_unwrap_pad(kek, ours), pt);
        }
    }
}

TEST(KeyWrap, RejectsMutationsAndWrongKek)
{
    std::mt19937 rng(4);
    Bytes kek = test::random_payload(rng, 32);
    Bytes pt = test::random_payload(rng, 45);
    Bytes w = aes_key_wrap_pad(kek, pt);
    for (std::size_t i = 0; i < w.size(); ++i) {
        Bytes m = w;
        m[i] ^= 0x01;
        EXPECT_FALSE(aes_key_unwrap_pad(kek, m)) << i;
    }
    Bytes other = kek;
    other[0] ^= 0x80;
    EXPECT_FALSE(aes_key_unwrap_pad(other, w));
    EXPECT_FALSE(aes_key_unwrap_pad(kek, Bytes(w.begin(), w.end() - 8)));
    EXPECT_FALSE(aes_key_unwrap_pad(kek, Bytes(7)));
    EXPECT_THROW(aes_key_wrap_pad(kek, Bytes{}), CryptoError);
    EXPECT_THROW(aes_key_wrap_pad(Bytes(20), pt), CryptoError);
}

TEST(CredentialWrapper, IdentityAndIntegrity)
{
    AesCredentialWrapper w;
    Bytes key = w.generate_key();
    ASSERT_EQ(key.size(), kWrapKeySize);
    std::mt19937 rng(5);
    for (int i = 0; i < 50; ++i) {
        Bytes pt = test::random_payload(rng, 1 + rng() % 200);
        Bytes ct = w.wrap(key, pt);
        EXPECT_EQ(w.unwrap(key, ct), pt);
        ct[rng() % ct.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        EXPECT_FALSE(w.unwrap(key, ct));
    }
    EXPECT_FALSE(w.unwrap(w.generate_key(), w.wrap(key, Bytes{1, 2, 3})));
}

TEST(P256, PublicPointMatchesOracleScalarMultiple)
{
    for (int i = 0; i < 5; ++i) {
        auto k = P256Key::generate();
        auto pt = k.public_point();
        auto expect = oracle::mul(oracle::from_be(k.private_scalar()), oracle::p256_g());
        EXPECT_EQ(oracle::from_be(pt.x), expect.x);
        EXPECT_EQ(oracle::from_be(pt.y), expect.y);
        EXPECT_TRUE(P256Key::is_on_curve(pt.x, pt.y));
    }
}

TEST(P256, SignaturesVerifyUnderOracle)
{
    auto k = P256Key::generate();
    auto pub = to_oracle(k.public_point());
    for (int i = 0; i < 10; ++i) {
        Bytes msg = to_bytes("message " + std::to_string(i));
        Bytes sig = k.sign(msg);
        EXPECT_TRUE(oracle::ecdsa_verify_der(pub, oracle::sha256(msg), sig));
        EXPECT_FALSE(oracle::ecdsa_verify_der(pub, oracle::sha256(to_bytes("other")), sig));
        EXPECT_TRUE(k.verify(msg, sig));
    }
    Bytes digest(32, 0x42);
    auto raw = k.sign_digest(digest);
    EXPECT_TRUE(oracle::ecdsa_verify(pub, digest, oracle::from_be(raw.r), oracle::from_be(raw.s)));
    EXPECT_TRUE(k.verify_digest(digest, der_from_raw(raw)));
}

TEST(P256, EcdhMatchesOracle)
{
    auto a = P256Key::generate();
    auto b = P256Key::generate();
    Bytes x = a.ecdh_x(P256Key::from_public(b.public_point()));
    EXPECT_EQ(x, oracle::ecdh_x(oracle::from_be(a.private_scalar()), to_oracle(b.public_point())));
    EXPECT_EQ(x, b.ecdh_x(a));
}

TEST(P256, RejectsOffCurvePoints)
{
    auto pt = P256Key::generate().public_point();
    pt.y.back() ^= 1;
    EXPECT_FALSE(P256Key::is_on_curve(pt.x, pt.y));
    EXPECT_THROW(P256Key::from_public(pt), CryptoError);
}

TEST(P256, DerRawConversion)
{
    RawSignature raw{Bytes(32, 0), Bytes(32, 0)};
    raw.r[31] = 1;
    raw.s[0] = 0x80;
    Bytes der = der_from_raw(raw);
    auto parsed = oracle::parse_der_signature(der);
    ASSERT_TRUE(parsed);
    EXPECT_EQ(parsed->first, 1);
    EXPECT_EQ(oracle::to_be(parsed->second), raw.s);
    auto back = raw_from_der(der);
    EXPECT_EQ(back.r, raw.r);
    EXPECT_EQ(back.s, raw.s);
}

TEST(P256, Pkcs8RoundTrip)
{
    auto k = P256Key::generate();
    auto k2 = P256Key::from_pkcs8(k.pkcs8());
    EXPECT_EQ(k2.public_point(), k.public_point());
    EXPECT_EQ(P256Key::from_private_scalar(k.private_scalar()).public_point(), k.public_point());
}

TEST(DeterministicRandom, SameSeedSameStreamAndSignatures)
{
    Bytes r1, r2, s1, s2;
    EcPoint p1, p2;
    {
        DeterministicRandomScope scope(to_bytes("seed"));
        EXPECT_TRUE(deterministic_random_active());
        r1 = random_bytes(40);
        auto k = P256Key::generate();
        p1 = k.public_point();
        s1 = k.sign(to_bytes("m"));
        EXPECT_TRUE(oracle::ecdsa_verify_der(to_oracle(p1), oracle::sha256(to_bytes("m")), s1));
    }
    EXPECT_FALSE(deterministic_random_active());
    {
        DeterministicRandomScope scope(to_bytes("seed"));
        r2 = random_bytes(40);
        auto k = P256Key::generate();
        p2 = k.public_point();
        s2 = k.sign(to_bytes("m"));
    }
    EXPECT_EQ(r1, r2);
    EXPECT_EQ(p1, p2);
    EXPECT_EQ(s1, s2);
    EXPECT_NE(random_bytes(40), r1);
}

TEST(ProviderRegistry, OneProviderPerAlgorithm)
{
    ProviderRegistry reg;
    reg.add(std::make_shared<Es256Provider>());
    EXPECT_THROW(reg.add(std::make_shared<Es256Provider>()), CryptoError);
    EXPECT_NE(reg.find(-7), nullptr);
    EXPECT_EQ(reg.find(-8), nullptr);
    EXPECT_THROW(reg.require(-8), UnsupportedAlgorithm);
    EXPECT_EQ(reg.algorithms(), std::vector<std::int64_t>{-7});
}

TEST(Es256Provider, GenerateLoadAndCose)
{
    Es256Provider p;
    auto kp = p.generate();
    Bytes sig = kp.private_key->sign(to_bytes("data"));
    EXPECT_TRUE(kp.public_key->verify(to_bytes("data"), sig));
    auto again = p.load(kp.private_key->encoded());
    EXPECT_TRUE(again.public_key->verify(to_bytes("data"), sig));
    auto pub = p.load_public(kp.public_key->cose());
    EXPECT_TRUE(pub->verify(to_bytes("data"), again.private_key->sign(to_bytes("data"))));
    auto cose = ctap2::cose_ec2_decode(kp.public_key->cose());
    EXPECT_EQ(cose.alg, -7);
    EXPECT_THROW(p.load(Bytes{1, 2, 3}), CryptoError);
}
