// Send/receive byte primitives: passphrase-to-key derivation, QuickLZ compression,
// AES-256-CBC envelopes with an IV prefix, and the dormant Base64+AES helpers.

#pragma once

#include <array>

#include "bqlab/aes.hpp"
#include "bqlab/base64.hpp"
#include "bqlab/bytes.hpp"
#include "bqlab/md5.hpp"
#include "bqlab/quicklz.hpp"

namespace bqlab::codec {

using CompressionLevel = quicklz::Level;

struct Passphrase {
    std::string text;
};

struct SessionKey {
    std::array<std::uint8_t, 32> bytes{};

    ByteView view() const { return ByteView{bytes.data(), bytes.size()}; }
    std::string hex() const { return toHex(view()); }
};

/// Encrypted wire unit: 16-byte IV followed by the CBC ciphertext.
struct Envelope {
    std::array<std::uint8_t, 16> iv{};
    Bytes ciphertext;

    Bytes serialize() const {
        Bytes out(16 + ciphertext.size());
        std::copy(iv.begin(), iv.end(), out.begin());
        std::copy(ciphertext.begin(), ciphertext.end(), out.begin() + 16);
        return out;
    }

    static Envelope parse(ByteView raw) {
        if (raw.size() < 32) throw BadLength("envelope shorter than IV plus one block");
        if ((raw.size() - 16) % 16 != 0) throw BadLength("envelope ciphertext not block-aligned");
        Envelope env;
        std::copy(raw.begin(), raw.begin() + 16, env.iv.begin());
        env.ciphertext.assign(raw.begin() + 16, raw.end());
        return env;
    }
};

/// 32-byte session key from a passphrase: MD5(p) followed by MD5(MD5(p)).
/// The doubled-digest expansion is this lab's convention for pairing a 16-byte
/// MD5 with a 256-bit cipher; it is deterministic and documented, nothing more.
inline SessionKey deriveKey(const Passphrase& passphrase) {
    auto first = md5::digest(toBytes(passphrase.text));
    auto second = md5::digest(ByteView{first.data(), first.size()});
    SessionKey key;
    std::copy(first.begin(), first.end(), key.bytes.begin());
    std::copy(second.begin(), second.end(), key.bytes.begin() + 16);
    return key;
}

inline Bytes compress(ByteView data, CompressionLevel level) {
    return quicklz::compress(data, level);
}

inline Bytes decompress(ByteView data) {
    return quicklz::decompress(data);
}

/// AES-256-CBC/PKCS7 under the session key. The caller supplies the IV so runs
/// stay reproducible; production callers draw it from an Rng.
inline Envelope seal(ByteView plaintext, const SessionKey& key, ByteView iv) {
    if (iv.size() != 16) throw BadLength("IV must be 16 bytes");
    Envelope env;
    std::copy(iv.begin(), iv.end(), env.iv.begin());
    env.ciphertext = aes::cbcEncrypt(plaintext, key.view(), iv);
    return env;
}

inline Bytes open(const Envelope& env, const SessionKey& key) {
    if (env.ciphertext.empty() || env.ciphertext.size() % 16 != 0)
        throw BadLength("envelope ciphertext not block-aligned");
    return aes::cbcDecrypt(env.ciphertext, key.view(), ByteView{env.iv.data(), env.iv.size()});
}

// The sample ships three leftover helpers around Base64: two encrypt variants and
// a decrypt that only knows the embedded default key. The custom-key encryptor has
// no paired decryptor; it exists here for fixture generation, as in the original.

inline std::string encryptB64Custom(ByteView data, const Passphrase& passphrase, ByteView iv) {
    const auto key = deriveKey(passphrase);
    const auto sealed = seal(toBytes(base64::encode(data)), key, iv);
    return base64::encode(sealed.serialize());
}

inline std::string encryptB64Default(ByteView data, const SessionKey& defaultKey, ByteView iv) {
    const auto sealed = seal(toBytes(base64::encode(data)), defaultKey, iv);
    return base64::encode(sealed.serialize());
}

inline Bytes decryptB64Default(std::string_view text, const SessionKey& defaultKey) {
    const Bytes raw = base64::decode(text);
    const Bytes inner = open(Envelope::parse(raw), defaultKey);
    return base64::decode(toString(inner));
}

} // namespace bqlab::codec
