#include <gtest/gtest.h>

#include <string>

#include "cbor/cbor.hpp"
#include "crypto/primitives.hpp"
#include "p256_gmp.hpp"
#include "support/test_util.hpp"
#include "tpm/tpm_es256_provider.hpp"
#include "vauth/web_authn_tpm.h"

using namespace vauth;

namespace {

Byte_array arr(std::string& s) { return Byte_array{static_cast<uint16_t>(s.size()), reinterpret_cast<Byte*>(s.data())}; }
Byte_array arr(Bytes& b) { return Byte_array{static_cast<uint16_t>(b.size()), b.data()}; }
Bytes copy(Byte_array a) { return a.size ? Bytes(a.data, a.data + a.size) : Bytes{}; }

struct OwnedKey {
    Bytes pub, priv;
    explicit OwnedKey(Key_data kd) : pub(copy(kd.public_data)), priv(copy(kd.private_data)) {}
    Key_data view() { return Key_data{arr(pub), arr(priv)}; }
};

class TpmTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        tpm = install_tpm();
        ASSERT_NE(tpm, nullptr);
        ASSERT_EQ(setup_tpm(tpm, false, dir.path().c_str(), nullptr), VAUTH_TPM_RC_SUCCESS) << get_last_error(tpm);
    }
    void TearDown() override { uninstall_tpm(tpm); }

    void reopen(const std::filesystem::path& d)
    {
        uninstall_tpm(tpm);
        tpm = install_tpm();
        ASSERT_EQ(setup_tpm(tpm, false, d.c_str(), nullptr), VAUTH_TPM_RC_SUCCESS) << get_last_error(tpm);
    }

    test::TempDir dir;
    void* tpm = nullptr;
    std::string user = "alice", user_auth = "user-pw", rp = "example.com", rp_auth = "rp-pw";
};

} // namespace

TEST(TpmBoundary, RequiresSetup)
{
    void* t = install_tpm();
    std::string u = "u", a = "a";
    Key_data kd = create_and_load_user_key(t, arr(u), arr(a));
    EXPECT_EQ(kd.public_data.size, 0);
    EXPECT_NE(std::string(get_last_error(t)), "");
    EXPECT_EQ(std::string(get_last_error(t)), "");
    test::TempDir d;
    EXPECT_NE(setup_tpm(t, true, d.path().c_str(), nullptr), VAUTH_TPM_RC_SUCCESS);
    uninstall_tpm(t);
    EXPECT_EQ(setup_tpm(nullptr, false, "x", nullptr), VAUTH_TPM_RC_INITIALIZE);
}

TEST_F(TpmTest, SignatureVerifiesWithOracle)
{
    OwnedKey user_key(create_and_load_user_key(tpm, arr(user), arr(user_auth)));
    ASSERT_GT(user_key.pub.size(), 0u) << get_last_error(tpm);
    Relying_party_key rk = create_and_load_rp_key(tpm, arr(rp), arr(user_auth), arr(rp_auth));
    ASSERT_EQ(rk.key_point.x_coord.size, 32);
    oracle::Point pub{oracle::from_be(copy(rk.key_point.x_coord)), oracle::from_be(copy(rk.key_point.y_coord)), false};
    EXPECT_TRUE(oracle::on_curve(pub));

    Bytes digest = oracle::sha256(to_bytes("message"));
    Ecdsa_sig sig = sign_using_rp_key(tpm, arr(rp), arr(digest), arr(rp_auth));
    ASSERT_GT(sig.sig_r.size, 0) << get_last_error(tpm);
    EXPECT_TRUE(oracle::ecdsa_verify(pub, digest, oracle::from_be(copy(sig.sig_r)), oracle::from_be(copy(sig.sig_s))));

    Bytes long_digest(33, 1);
    sig = sign_using_rp_key(tpm, arr(rp), arr(long_digest), arr(rp_auth));
    EXPECT_EQ(sig.sig_r.size, 0);
    EXPECT_NE(std::string(get_last_error(tpm)), "");

    std::string bad = "nope";
    sig = sign_using_rp_key(tpm, arr(rp), arr(digest), arr(bad));
    EXPECT_EQ(sig.sig_r.size, 0);
    EXPECT_NE(std::string(get_last_error(tpm)), "");
    EXPECT_EQ(std::string(get_last_error(tpm)), "");
}

TEST_F(TpmTest, BlobsSurviveRestartWithSameRoot)
{
    OwnedKey user_key(create_and_load_user_key(tpm, arr(user), arr(user_auth)));
    Relying_party_key rk = create_and_load_rp_key(tpm, arr(rp), arr(user_auth), arr(rp_auth));
    OwnedKey rp_key(rk.key_blob);
    Bytes x = copy(rk.key_point.x_coord);

    reopen(dir.path());
    ASSERT_EQ(load_user_key(tpm, user_key.view(), arr(user)), VAUTH_TPM_RC_SUCCESS) << get_last_error(tpm);
    Key_ecc_point pt = load_rp_key(tpm, rp_key.view(), arr(rp), arr(user_auth));
    EXPECT_EQ(copy(pt.x_coord), x) << get_last_error(tpm);
    Bytes digest(32, 9);
    EXPECT_GT(sign_using_rp_key(tpm, arr(rp), arr(digest), arr(rp_auth)).sig_r.size, 0);

    test::TempDir other;
    reopen(other.path());
    EXPECT_NE(load_user_key(tpm, user_key.view(), arr(user)), VAUTH_TPM_RC_SUCCESS);
}

TEST_F(TpmTest, WrongAuthorisationAndParent)
{
    OwnedKey user_key(create_and_load_user_key(tpm, arr(user), arr(user_auth)));
    std::string wrong = "wrong";
    Relying_party_key rk = create_and_load_rp_key(tpm, arr(rp), arr(wrong), arr(rp_auth));
    EXPECT_EQ(rk.key_blob.public_data.size, 0);

    rk = create_and_load_rp_key(tpm, arr(rp), arr(user_auth), arr(rp_auth));
    OwnedKey rp_key(rk.key_blob);
    EXPECT_EQ(load_rp_key(tpm, rp_key.view(), arr(rp), arr(wrong)).x_coord.size, 0);
    std::string other_rp = "other.com";
    EXPECT_EQ(load_rp_key(tpm, rp_key.view(), arr(other_rp), arr(user_auth)).x_coord.size, 0);

    std::string bob = "bob";
    OwnedKey bob_key(create_and_load_user_key(tpm, arr(bob), arr(user_auth)));
    EXPECT_EQ(load_rp_key(tpm, rp_key.view(), arr(rp), arr(user_auth)).x_coord.size, 0);

    ASSERT_EQ(load_user_key(tpm, user_key.view(), arr(user)), VAUTH_TPM_RC_SUCCESS);
    EXPECT_EQ(load_rp_key(tpm, rp_key.view(), arr(rp), arr(user_auth)).x_coord.size, 32);
    EXPECT_NE(load_user_key(tpm, user_key.view(), arr(bob)), VAUTH_TPM_RC_SUCCESS);

    OwnedKey tampered = rp_key;
    tampered.priv.back() ^= 1;
    ASSERT_EQ(load_user_key(tpm, user_key.view(), arr(user)), VAUTH_TPM_RC_SUCCESS);
    EXPECT_EQ(load_rp_key(tpm, tampered.view(), arr(rp), arr(user_auth)).x_coord.size, 0);
}

TEST_F(TpmTest, FlushUnloadsKeys)
{
    create_and_load_user_key(tpm, arr(user), arr(user_auth));
    create_and_load_rp_key(tpm, arr(rp), arr(user_auth), arr(rp_auth));
    EXPECT_EQ(flush_data(tpm), VAUTH_TPM_RC_SUCCESS);
    Bytes digest(32, 1);
    EXPECT_EQ(sign_using_rp_key(tpm, arr(rp), arr(digest), arr(rp_auth)).sig_r.size, 0);
}

TEST_F(TpmTest, LogFileWritten)
{
    bool found = false;
    for (const auto& e : std::filesystem::directory_iterator(dir.path()))
        found |= e.path().filename().string().rfind("tpm_log_", 0) == 0;
    EXPECT_TRUE(found);
}

TEST(TpmProvider, SignsAndReloads)
{
    test::TempDir dir;
    Bytes encoded;
    cbor::Value cose;
    {
        tpm::TpmEs256Provider p(dir.path(), "vauth", "secret");
        EXPECT_EQ(p.algorithm(), -7);
        auto pair = p.generate();
        encoded = pair.private_key->encoded();
        cose = pair.public_key->cose();
        Bytes sig = pair.private_key->sign(to_bytes("hello"));
        oracle::Point pub{oracle::from_be(cose.find(-2)->as_bytes()), oracle::from_be(cose.find(-3)->as_bytes()),
                          false};
        EXPECT_TRUE(oracle::ecdsa_verify_der(pub, oracle::sha256(to_bytes("hello")), sig));
        EXPECT_TRUE(pair.public_key->verify(to_bytes("hello"), sig));
    }
    tpm::TpmEs256Provider again(dir.path(), "vauth", "secret");
    auto pair = again.load(encoded);
    EXPECT_EQ(pair.public_key->cose(), cose);
    EXPECT_TRUE(pair.public_key->verify(to_bytes("x"), pair.private_key->sign(to_bytes("x"))));
    EXPECT_THROW(tpm::TpmEs256Provider(dir.path(), "vauth", "wrong"), crypto::CryptoError);
}
