#include "storage/envelope.hpp"

#include <chrono>

#include "crypto/primitives.hpp"

namespace vauth::storage {

namespace {

void check_structure(ByteView env)
{
    if (env.size() < kEnvelopeMinSize)
        throw EnvelopeError(EnvelopeErrorKind::format, "encrypted store is truncated");
    if ((env.size() - kEnvelopeHeaderSize - 32) % 16 != 0)
        throw EnvelopeError(EnvelopeErrorKind::format, "encrypted store ciphertext is not block aligned");
}

} // namespace

Bytes derive_storage_key(std::string_view password, ByteView salt, unsigned iterations)
{
    if (password.empty())
        throw std::invalid_argument("storage password must not be empty");
    if (salt.size() != kSaltSize)
        throw std::invalid_argument("storage salt must be 16 bytes");
    return crypto::pbkdf2_sha256(password, salt, iterations, 32);
}

Bytes seal_envelope(ByteView key, ByteView salt, ByteView plaintext, std::uint64_t timestamp)
{
    if (key.size() != 32 || salt.size() != kSaltSize)
        throw std::invalid_argument("bad envelope key or salt size");
    Bytes iv = crypto::random_bytes(16);
    Bytes out(salt.begin(), salt.end());
    out.push_back(kEnvelopeVersion);
    put_u64_be(out, timestamp);
    append(out, iv);
    append(out, crypto::aes128_cbc_pkcs7_encrypt(key.subspan(16, 16), iv, plaintext));
    append(out, crypto::hmac_sha256(key.subspan(0, 16), out));
    return out;
}

Bytes seal_envelope(ByteView key, ByteView salt, ByteView plaintext)
{
    auto now = std::chrono::system_clock::now().time_since_epoch();
    return seal_envelope(key, salt, plaintext,
                         static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(now).count()));
}

Bytes open_envelope(ByteView key, ByteView env)
{
    check_structure(env);
    if (key.size() != 32)
        throw std::invalid_argument("bad envelope key size");
    ByteView signed_part = env.first(env.size() - 32);
    ByteView tag = env.last(32);
    if (!crypto::constant_time_equal(crypto::hmac_sha256(key.subspan(0, 16), signed_part), tag))
        throw EnvelopeError(EnvelopeErrorKind::authentication,
                            "encrypted store authentication failed (wrong password or modified file)");
    if (env[kSaltSize] != kEnvelopeVersion)
        throw EnvelopeError(EnvelopeErrorKind::format, "unsupported encrypted store version");
    ByteView iv = env.subspan(kSaltSize + 9, 16);
    ByteView ct = env.subspan(kEnvelopeHeaderSize, env.size() - kEnvelopeHeaderSize - 32);
    try {
        return crypto::aes128_cbc_pkcs7_decrypt(key.subspan(16, 16), iv, ct);
    } catch (const crypto::CryptoError&) {
        // Only reachable with a valid tag, i.e. a writer bug.
        throw EnvelopeError(EnvelopeErrorKind::format, "encrypted store padding is invalid");
    }
}

Bytes envelope_salt(ByteView env)
{
    check_structure(env);
    return Bytes(env.begin(), env.begin() + kSaltSize);
}

std::uint64_t envelope_timestamp(ByteView env)
{
    check_structure(env);
    return get_u64_be(env.data() + kSaltSize + 1);
}

} // namespace vauth::storage
