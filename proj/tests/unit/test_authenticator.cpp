#include <gtest/gtest.h>

#include <random>

#include "authenticator/auth_data.hpp"
#include "authenticator/authenticator.hpp"
#include "cbor/cbor.hpp"
#include "crypto/es256_provider.hpp"
#include "crypto/p256.hpp"
#include "p256_gmp.hpp"
#include "sym_oracle.hpp"
#include "support/test_util.hpp"

using namespace vauth;
using namespace vauth::authenticator;
using namespace vauth::ctap2;

namespace {

Status status_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const CtapError& e) {
        return e.status();
    }
    return Status::ok;
}

oracle::Point cose_point(const cbor::Value& cose)
{
    return {oracle::from_be(cose.find(-2)->as_bytes()), oracle::from_be(cose.find(-3)->as_bytes()), false};
}

bool oracle_verify(const cbor::Value& cose, ByteView auth_data, ByteView cdh, const Bytes& sig)
{
    Bytes msg = concat(auth_data, cdh);
    return oracle::ecdsa_verify_der(cose_point(cose), oracle::sha256(msg), sig);
}

/// Platform side of PIN protocol 1, computed with the test oracles.
struct Platform {
    crypto::P256Key key = crypto::P256Key::generate();
    Bytes shared;

    CoseEc2Key agree(const Authenticator& a)
    {
        auto peer = a.key_agreement_point();
        shared = oracle::sha256(oracle::ecdh_x(oracle::from_be(key.private_scalar()),
                                               {oracle::from_be(peer.x), oracle::from_be(peer.y), false}));
        auto pub = key.public_point();
        return CoseEc2Key{cose_alg::ecdh_es_hkdf_256, pub.x, pub.y};
    }
    Bytes enc(const Bytes& pt) const { return oracle::aes_cbc_encrypt(shared, Bytes(16, 0), pt); }
    Bytes dec(const Bytes& ct) const { return oracle::aes_cbc_decrypt(shared, Bytes(16, 0), ct); }
    Bytes mac(const Bytes& key, const Bytes& data) const
    {
        Bytes m = oracle::hmac_sha256(key, data);
        return Bytes(m.begin(), m.begin() + 16);
    }
    static Bytes padded(const std::string& pin)
    {
        Bytes p(64, 0);
        std::copy(pin.begin(), pin.end(), p.begin());
        return p;
    }
    static Bytes hash16(const std::string& pin)
    {
        Bytes h = oracle::sha256(to_bytes(pin));
        return Bytes(h.begin(), h.begin() + 16);
    }
};

class AuthenticatorTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        store = storage::Store::open_or_init({dir / "store.json"});
        providers.add(std::make_shared<crypto::Es256Provider>());
        AuthenticatorConfig cfg;
        cfg.aaguid = from_hex("00112233445566778899aabbccddeeff");
        auth = std::make_unique<Authenticator>(*store, providers, approve, cfg);
    }

    MakeCredentialParameters mc(const std::string& rp, std::uint8_t user, std::optional<bool> rk = true)
    {
        MakeCredentialParameters p;
        p.client_data_hash = Bytes(32, user);
        p.rp = RpEntity{rp, std::nullopt};
        p.user = UserEntity{Bytes{user}, "user" + std::to_string(user), std::nullopt};
        p.pub_key_cred_params = {CredentialParameter{kPublicKeyType, -7}};
        p.rk = rk;
        return p;
    }
    GetAssertionParameters ga(const std::string& rp, std::vector<Bytes> allow = {})
    {
        GetAssertionParameters p;
        p.rp_id = rp;
        p.client_data_hash = Bytes(32, 0x5A);
        if (!allow.empty()) {
            p.allow_list.emplace();
            for (auto& id : allow)
                p.allow_list->push_back(CredentialDescriptor{kPublicKeyType, id, std::nullopt});
        }
        return p;
    }

    void set_pin(const std::string& pin)
    {
        Platform pl;
        ClientPinParameters p;
        p.sub_command = PinSubCommand::set_pin;
        p.key_agreement = pl.agree(*auth);
        p.new_pin_enc = pl.enc(Platform::padded(pin));
        p.pin_auth = pl.mac(pl.shared, *p.new_pin_enc);
        auth->client_pin(p);
    }
    ClientPinParameters token_request(Platform& pl, const std::string& pin)
    {
        ClientPinParameters p;
        p.sub_command = PinSubCommand::get_pin_token;
        p.key_agreement = pl.agree(*auth);
        p.pin_hash_enc = pl.enc(Platform::hash16(pin));
        return p;
    }
    Bytes pin_token(const std::string& pin)
    {
        Platform pl;
        auto r = auth->client_pin(token_request(pl, pin));
        return pl.dec(*r.pin_token);
    }
    int retries()
    {
        ClientPinParameters p;
        p.sub_command = PinSubCommand::get_retries;
        return static_cast<int>(*auth->client_pin(p).retries);
    }

    test::TempDir dir;
    std::unique_ptr<storage::Store> store;
    crypto::ProviderRegistry providers;
    AutoApprovePolicy approve;
    std::unique_ptr<Authenticator> auth;
};

} // namespace

TEST_F(AuthenticatorTest, GetInfo)
{
    auto info = auth->get_info();
    EXPECT_EQ(info.versions, std::vector<std::string>{"FIDO_2_0"});
    EXPECT_EQ(to_hex(info.aaguid), "00112233445566778899aabbccddeeff");
    EXPECT_EQ(info.max_msg_size, 7609);
    EXPECT_EQ(info.options.at("clientPin"), false);
    EXPECT_EQ(*info.pin_protocols, std::vector<std::int64_t>{1});
    EXPECT_EQ(*info.algorithms, std::vector<std::int64_t>{-7});
    set_pin("1234");
    EXPECT_EQ(auth->get_info().options.at("clientPin"), true);
}

TEST_F(AuthenticatorTest, MakeCredentialSelfAttestation)
{
    auto p = mc("example.com", 1);
    auto r = auth->make_credential(p);
    EXPECT_EQ(r.fmt, "packed");
    EXPECT_EQ(r.att_stmt.alg, -7);
    auto ad = parse_auth_data(r.auth_data);
    EXPECT_EQ(ad.rp_id_hash, oracle::sha256(to_bytes("example.com")));
    EXPECT_EQ(ad.flags, flags::up | flags::at);
    EXPECT_EQ(ad.counter, 1u);
    ASSERT_TRUE(ad.attested && ad.public_key);
    EXPECT_EQ(to_hex(ad.attested->aaguid), "00112233445566778899aabbccddeeff");
    EXPECT_EQ(ad.attested->credential_id.size(), 16u);
    EXPECT_TRUE(oracle::on_curve(cose_point(*ad.public_key)));
    EXPECT_TRUE(oracle_verify(*ad.public_key, r.auth_data, p.client_data_hash, r.att_stmt.sig));
    EXPECT_EQ(store->get_credential_source_by_rp("example.com").size(), 1u);
}

TEST_F(AuthenticatorTest, NonResidentCredentialIsWrapped)
{
    auto r = auth->make_credential(mc("example.com", 1, false));
    auto ad = parse_auth_data(r.auth_data);
    Bytes id = ad.attested->credential_id;
    EXPECT_GT(id.size(), 16u);
    EXPECT_TRUE(store->get_credential_source_by_rp("example.com").empty());

    EXPECT_EQ(status_of([&] { auth->get_assertion(ga("example.com")); }), Status::no_credentials);
    auto p = ga("example.com", {id});
    auto a = auth->get_assertion(p);
    EXPECT_EQ(a.credential.id, id);
    EXPECT_FALSE(a.user);
    EXPECT_TRUE(oracle_verify(*ad.public_key, a.auth_data, p.client_data_hash, a.signature));

    EXPECT_EQ(status_of([&] { auth->get_assertion(ga("other.com", {id})); }), Status::no_credentials);
    id[5] ^= 1;
    EXPECT_EQ(status_of([&] { auth->get_assertion(ga("example.com", {id})); }), Status::no_credentials);
}

TEST_F(AuthenticatorTest, ExcludeList)
{
    auto res = parse_auth_data(auth->make_credential(mc("example.com", 1)).auth_data).attested->credential_id;
    auto wrapped =
        parse_auth_data(auth->make_credential(mc("example.com", 2, false)).auth_data).attested->credential_id;
    for (const auto& id : {res, wrapped}) {
        auto p = mc("example.com", 3);
        p.exclude_list = std::vector<CredentialDescriptor>{{kPublicKeyType, id, std::nullopt}};
        EXPECT_EQ(status_of([&] { auth->make_credential(p); }), Status::credential_excluded);
        p.rp.id = "other.com";
        EXPECT_EQ(status_of([&] { auth->make_credential(p); }), Status::ok);
    }
}

TEST_F(AuthenticatorTest, UnsupportedAlgorithmAndUvOption)
{
    auto p = mc("example.com", 1);
    p.pub_key_cred_params = {CredentialParameter{kPublicKeyType, -8}, CredentialParameter{"other", -7}};
    EXPECT_EQ(status_of([&] { auth->make_credential(p); }), Status::unsupported_algorithm);
    p = mc("example.com", 1);
    p.uv = true;
    EXPECT_EQ(status_of([&] { auth->make_credential(p); }), Status::invalid_option);
}

TEST_F(AuthenticatorTest, PresenceDeniedLeavesNoTrace)
{
    AutoDenyPolicy deny;
    auth->set_presence_policy(deny);
    EXPECT_EQ(status_of([&] { auth->make_credential(mc("example.com", 1)); }), Status::operation_denied);
    EXPECT_TRUE(store->get_credential_source_by_rp("example.com").empty());
    EXPECT_EQ(store->counter(), 0u);
}

TEST_F(AuthenticatorTest, ScriptedPolicyExhaustion)
{
    ScriptedPolicy script({true});
    auth->set_presence_policy(script);
    EXPECT_EQ(auth->process_cbor(encode_request(mc("example.com", 1)))[0], 0x00);
    EXPECT_EQ(auth->process_cbor(encode_request(mc("example.com", 2)))[0], 0x7F);
    EXPECT_EQ(script.remaining(), 0u);
    ASSERT_EQ(script.prompts().size(), 2u);
    EXPECT_EQ(script.prompts()[0].operation, "makeCredential");
    EXPECT_EQ(script.prompts()[0].rp_id, "example.com");
}

TEST_F(AuthenticatorTest, AssertionIterationMostRecentFirst)
{
    std::vector<cbor::Value> keys;
    for (std::uint8_t u = 1; u <= 3; ++u)
        keys.push_back(*parse_auth_data(auth->make_credential(mc("example.com", u)).auth_data).public_key);
    auth->make_credential(mc("other.com", 9));

    auto p = ga("example.com");
    auto first = auth->get_assertion(p);
    EXPECT_EQ(first.number_of_credentials, 3);
    std::vector<GetAssertionResponse> all{first};
    all.push_back(auth->get_next_assertion());
    all.push_back(auth->get_next_assertion());
    EXPECT_EQ(status_of([&] { auth->get_next_assertion(); }), Status::not_allowed);

    std::uint32_t last = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& a = all[i];
        ASSERT_TRUE(a.user);
        EXPECT_EQ(a.user->id, Bytes{static_cast<std::uint8_t>(3 - i)});
        auto ad = parse_auth_data(a.auth_data);
        EXPECT_FALSE(ad.flags & flags::at);
        EXPECT_EQ(ad.flags & flags::up, flags::up);
        EXPECT_GT(ad.counter, last);
        last = ad.counter;
        EXPECT_TRUE(oracle_verify(keys[2 - i], a.auth_data, p.client_data_hash, a.signature));
        if (i > 0)
            EXPECT_FALSE(a.number_of_credentials);
    }
}

TEST_F(AuthenticatorTest, GetNextWithoutAssertion)
{
    EXPECT_EQ(status_of([&] { auth->get_next_assertion(); }), Status::not_allowed);
    auth->make_credential(mc("example.com", 1));
    auth->get_assertion(ga("example.com"));
    EXPECT_EQ(status_of([&] { auth->get_next_assertion(); }), Status::not_allowed);
}

TEST_F(AuthenticatorTest, SilentAssertionSkipsPresence)
{
    auth->make_credential(mc("example.com", 1));
    AutoDenyPolicy deny;
    auth->set_presence_policy(deny);
    auto p = ga("example.com");
    EXPECT_EQ(status_of([&] { auth->get_assertion(p); }), Status::operation_denied);
    p.up = false;
    auto a = auth->get_assertion(p);
    EXPECT_EQ(parse_auth_data(a.auth_data).flags, 0);
}

TEST_F(AuthenticatorTest, PinLifecycle)
{
    EXPECT_EQ(retries(), 8);
    Platform pl;
    EXPECT_EQ(status_of([&] { auth->client_pin(token_request(pl, "1234")); }), Status::pin_not_set);

    EXPECT_EQ(status_of([&] { set_pin("123"); }), Status::pin_policy_violation);
    set_pin("1234");
    EXPECT_EQ(status_of([&] { set_pin("5678"); }), Status::pin_auth_invalid);
    EXPECT_EQ(store->pin_record()->pin_hash, Platform::hash16("1234"));

    auto p = mc("example.com", 1);
    EXPECT_EQ(status_of([&] { auth->make_credential(p); }), Status::pin_required);
    Bytes token = pin_token("1234");
    ASSERT_EQ(token.size(), 16u);
    p.pin_protocol = 1;
    p.pin_auth = Bytes(16, 0);
    EXPECT_EQ(status_of([&] { auth->make_credential(p); }), Status::pin_auth_invalid);
    p.pin_auth = pl.mac(token, p.client_data_hash);
    auto r = auth->make_credential(p);
    EXPECT_EQ(parse_auth_data(r.auth_data).flags, flags::up | flags::uv | flags::at);
    EXPECT_EQ(pin_token("1234"), token);
}

TEST_F(AuthenticatorTest, WrongPinConsumesRetriesAndBlocks)
{
    set_pin("1234");
    auto before = auth->key_agreement_point();
    Platform pl;
    EXPECT_EQ(status_of([&] { auth->client_pin(token_request(pl, "0000")); }), Status::pin_invalid);
    EXPECT_NE(auth->key_agreement_point(), before);
    EXPECT_EQ(retries(), 7);
    pin_token("1234");
    EXPECT_EQ(retries(), 8);
    for (int i = 0; i < 7; ++i)
        EXPECT_EQ(status_of([&] { auth->client_pin(token_request(pl, "0000")); }), Status::pin_invalid);
    EXPECT_EQ(status_of([&] { auth->client_pin(token_request(pl, "0000")); }), Status::pin_blocked);
    EXPECT_EQ(retries(), 0);
    EXPECT_EQ(status_of([&] { pin_token("1234"); }), Status::pin_blocked);
}

TEST_F(AuthenticatorTest, ChangePin)
{
    set_pin("1234");
    Platform pl;
    ClientPinParameters p;
    p.sub_command = PinSubCommand::change_pin;
    p.key_agreement = pl.agree(*auth);
    p.pin_hash_enc = pl.enc(Platform::hash16("1234"));
    p.new_pin_enc = pl.enc(Platform::padded("abcdef"));
    p.pin_auth = pl.mac(pl.shared, concat(*p.new_pin_enc, *p.pin_hash_enc));
    auth->client_pin(p);
    EXPECT_EQ(store->pin_record()->pin_hash, Platform::hash16("abcdef"));
    EXPECT_EQ(status_of([&] { pin_token("1234"); }), Status::pin_invalid);
    EXPECT_NO_THROW(pin_token("abcdef"));
}

TEST_F(AuthenticatorTest, PasswordUvMode)
{
    AutoApprovePolicy with_password("hunter2");
    AuthenticatorConfig cfg;
    cfg.uv_mode = UvMode::password;
    cfg.password_verifier = [](std::string_view pw) { return pw == "hunter2"; };
    Authenticator a(*store, providers, with_password, cfg);
    EXPECT_TRUE(a.get_info().options.at("uv"));
    auto p = mc("example.com", 1);
    p.uv = true;
    EXPECT_EQ(parse_auth_data(a.make_credential(p).auth_data).flags, flags::up | flags::uv | flags::at);

    AutoApprovePolicy wrong("nope");
    a.set_presence_policy(wrong);
    EXPECT_EQ(status_of([&] { a.make_credential(p); }), Status::operation_denied);
}

TEST_F(AuthenticatorTest, ResetClearsEverything)
{
    auto id = parse_auth_data(auth->make_credential(mc("example.com", 1, false)).auth_data).attested->credential_id;
    auth->make_credential(mc("example.com", 2));
    set_pin("1234");
    Bytes old_wrap = store->wrap_key();

    AutoDenyPolicy deny;
    auth->set_presence_policy(deny);
    EXPECT_EQ(status_of([&] { auth->reset(); }), Status::operation_denied);
    auth->set_presence_policy(approve);
    auth->reset();

    EXPECT_FALSE(store->pin_record());
    EXPECT_EQ(store->counter(), 0u);
    EXPECT_NE(store->wrap_key(), old_wrap);
    EXPECT_EQ(status_of([&] { auth->get_assertion(ga("example.com")); }), Status::no_credentials);
    EXPECT_EQ(status_of([&] { auth->get_assertion(ga("example.com", {id})); }), Status::no_credentials);
}

TEST_F(AuthenticatorTest, ProcessCborNeverThrows)
{
    std::mt19937 rng(7);
    for (int i = 0; i < 500; ++i) {
        Bytes junk = test::random_payload(rng, rng() % 64);
        Bytes out;
        ASSERT_NO_THROW(out = auth->process_cbor(junk));
        ASSERT_FALSE(out.empty());
    }
    EXPECT_EQ(auth->process_cbor(Bytes{0x04})[0], 0x00);
}

TEST_F(AuthenticatorTest, CounterStrictlyIncreasesAcrossOperations)
{
    std::mt19937 rng(11);
    std::uint64_t last = store->counter();
    for (int i = 0; i < 40; ++i) {
        std::string rp = "rp" + std::to_string(rng() % 3) + ".example";
        if (rng() % 2)
            auth->make_credential(mc(rp, static_cast<std::uint8_t>(i), rng() % 2 == 0));
        else
            status_of([&] { auth->get_assertion(ga(rp)); });
        EXPECT_GE(store->counter(), last);
        last = store->counter();
    }
    auto p = ga("rp0.example");
    auth->make_credential(mc("rp0.example", 200));
    auto a = auth->get_assertion(p);
    EXPECT_EQ(parse_auth_data(a.auth_data).counter, store->counter());
}
