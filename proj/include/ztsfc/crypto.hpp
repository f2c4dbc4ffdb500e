#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

typedef struct evp_pkey_st EVP_PKEY;
typedef struct x509_st X509;

namespace ztsfc::crypto {

using Bytes = std::vector<std::uint8_t>;

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const noexcept;
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

struct X509Deleter {
  void operator()(X509* c) const noexcept;
};
using X509Ptr = std::unique_ptr<X509, X509Deleter>;

// -- encoding ---------------------------------------------------------------

// URL-safe base64 alphabet, no padding. Decode is strict: any character
// outside the alphabet (or stray '=') rejects the input.
std::string b64url_encode(std::span<const std::uint8_t> data);
std::optional<Bytes> b64url_decode(std::string_view text);

std::string hex_encode(std::span<const std::uint8_t> data);
std::optional<Bytes> hex_decode(std::string_view text);

// -- hashing / MACs ---------------------------------------------------------

Bytes sha256(std::span<const std::uint8_t> data);
Bytes sha256(std::string_view data);
Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);
Bytes hmac_sha1(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

Bytes random_bytes(std::size_t n);

// Constant-time comparison; false when lengths differ.
bool ct_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

// -- key material -----------------------------------------------------------

PkeyPtr generate_p256_key();
PkeyPtr load_private_key_file(const std::string& path);
X509Ptr load_certificate_file(const std::string& path);
PkeyPtr public_key_of_certificate(const std::string& cert_path);
std::string certificate_common_name(X509* cert);

// -- hybrid public-key encryption (ECIES) -----------------------------------
//
// Ephemeral ECDH on P-256, HKDF-SHA256, AES-256-GCM. The context string goes
// into both the KDF info and the AEAD associated data, so a blob sealed for
// one purpose cannot be opened under another. Blob layout:
//   uncompressed ephemeral point (65 bytes) || ciphertext || tag (16 bytes)

Bytes ecies_seal(EVP_PKEY* recipient_public, std::span<const std::uint8_t> plaintext,
                 std::string_view context);

// Empty optional on any authentication failure (tampered blob, wrong key,
// wrong context).
std::optional<Bytes> ecies_open(EVP_PKEY* recipient_private, std::span<const std::uint8_t> blob,
                                std::string_view context);

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}
inline std::string to_string(std::span<const std::uint8_t> b) {
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

}  // namespace ztsfc::crypto
