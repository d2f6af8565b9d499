#include "crypto/key_wrap.hpp"

#include <cstring>

#include "crypto/primitives.hpp"

namespace vauth::crypto {

namespace {

constexpr std::uint8_t kAivPrefix[4] = {0xA6, 0x59, 0x59, 0xA6};
constexpr std::uint32_t kMaxPlaintext = 0xFFFFFFFFu;

void xor_counter(std::uint8_t a[8], std::uint64_t t)
{
    for (int i = 7; i >= 0; --i) {
        a[i] ^= static_cast<std::uint8_t>(t);
        t >>= 8;
    }
}

} // namespace

Bytes aes_key_wrap_pad(ByteView kek, ByteView plaintext)
{
    if (plaintext.empty())
        throw CryptoError("key wrap plaintext must not be empty");
    if (plaintext.size() > kMaxPlaintext)
        throw CryptoError("key wrap plaintext too long");
    AesBlockCipher aes(kek);

    std::uint8_t aiv[8];
    std::memcpy(aiv, kAivPrefix, 4);
    auto mli = static_cast<std::uint32_t>(plaintext.size());
    aiv[4] = static_cast<std::uint8_t>(mli >> 24);
    aiv[5] = static_cast<std::uint8_t>(mli >> 16);
    aiv[6] = static_cast<std::uint8_t>(mli >> 8);
    aiv[7] = static_cast<std::uint8_t>(mli);

    std::size_t padded = (plaintext.size() + 7) / 8 * 8;
    std::size_t n = padded / 8;

    if (n == 1) {
        std::uint8_t block[16] = {};
        std::memcpy(block, aiv, 8);
        std::memcpy(block + 8, plaintext.data(), plaintext.size());
        aes.encrypt(block);
        return Bytes(block, block + 16);
    }

    Bytes r(padded, 0);
    std::memcpy(r.data(), plaintext.data(), plaintext.size());
    std::uint8_t a[8];
    std::memcpy(a, aiv, 8);
    std::uint8_t block[16];
    for (std::uint64_t j = 0; j <= 5; ++j) {
        for (std::size_t i = 1; i <= n; ++i) {
            std::memcpy(block, a, 8);
            std::memcpy(block + 8, &r[8 * (i - 1)], 8);
            aes.encrypt(block);
            std::memcpy(a, block, 8);
            xor_counter(a, n * j + i);
            std::memcpy(&r[8 * (i - 1)], block + 8, 8);
        }
    }
    Bytes out(a, a + 8);
    append(out, r);
    return out;
}

std::optional<Bytes> aes_key_unwrap_pad(ByteView kek, ByteView wrapped)
{
    if (wrapped.size() < 16 || wrapped.size() % 8 != 0)
        return std::nullopt;
    AesBlockCipher aes(kek);

    std::size_t n = wrapped.size() / 8 - 1;
    std::uint8_t a[8];
    Bytes r;

    if (n == 1) {
        std::uint8_t block[16];
        std::memcpy(block, wrapped.data(), 16);
        aes.decrypt(block);
        std::memcpy(a, block, 8);
        r.assign(block + 8, block + 16);
    } else {
        std::memcpy(a, wrapped.data(), 8);
        r.assign(wrapped.begin() + 8, wrapped.end());
        std::uint8_t block[16];
        for (std::uint64_t j = 6; j-- > 0;) {
            for (std::size_t i = n; i >= 1; --i) {
                std::memcpy(block, a, 8);
                xor_counter(block, n * j + i);
                std::memcpy(block + 8, &r[8 * (i - 1)], 8);
                aes.decrypt(block);
                std::memcpy(a, block, 8);
                std::memcpy(&r[8 * (i - 1)], block + 8, 8);
            }
        }
    }

    bool ok = std::memcmp(a, kAivPrefix, 4) == 0;
    std::uint32_t mli = get_u32_be(a + 4);
    ok = ok && mli > 8 * (n - 1) && mli <= 8 * n;
    if (ok) {
        std::uint8_t pad = 0;
        for (std::size_t i = mli; i < r.size(); ++i)
            pad |= r[i];
        ok = pad == 0;
    }
    if (!ok) {
        cleanse(r);
        return std::nullopt;
    }
    r.resize(mli);
    return r;
}

} // namespace vauth::crypto
