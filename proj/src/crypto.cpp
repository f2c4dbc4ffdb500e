#include "ztsfc/crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>
#include <openssl/param_build.h>
#include <openssl/pem.h>
#include <openssl/rand.h>
#include <openssl/x509.h>

#include <algorithm>
#include <array>
#include <cstring>

#include "ztsfc/errors.hpp"

namespace ztsfc::crypto {

namespace {

constexpr std::size_t kPointLen = 65;  // uncompressed P-256 point
constexpr std::size_t kTagLen = 16;
constexpr std::size_t kKeyLen = 32;
constexpr std::size_t kIvLen = 12;

struct CtxDeleter {
  void operator()(EVP_PKEY_CTX* c) const noexcept { EVP_PKEY_CTX_free(c); }
  void operator()(EVP_CIPHER_CTX* c) const noexcept { EVP_CIPHER_CTX_free(c); }
};
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, CtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

[[noreturn]] void fail(const std::string& what) { throw CryptoError(what); }

constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

std::array<int, 256> b64_reverse_table() {
  std::array<int, 256> t{};
  t.fill(-1);
  for (int i = 0; i < 64; ++i) {
    t[static_cast<unsigned char>(kB64Alphabet[i])] = i;
  }
  return t;
}

Bytes ecdh_shared_secret(EVP_PKEY* priv, EVP_PKEY* peer) {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new(priv, nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 ||
      EVP_PKEY_derive_set_peer(ctx.get(), peer) <= 0) {
    fail("ECDH setup failed");
  }
  std::size_t len = 0;
  if (EVP_PKEY_derive(ctx.get(), nullptr, &len) <= 0) fail("ECDH derive failed");
  Bytes out(len);
  if (EVP_PKEY_derive(ctx.get(), out.data(), &len) <= 0) fail("ECDH derive failed");
  out.resize(len);
  return out;
}

Bytes hkdf_sha256(std::span<const std::uint8_t> ikm, std::span<const std::uint8_t> salt,
                  std::span<const std::uint8_t> info, std::size_t out_len) {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) <= 0 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(), static_cast<int>(info.size())) <= 0) {
    fail("HKDF setup failed");
  }
  Bytes out(out_len);
  std::size_t len = out_len;
  if (EVP_PKEY_derive(ctx.get(), out.data(), &len) <= 0 || len != out_len) {
    fail("HKDF derive failed");
  }
  return out;
}

Bytes encoded_public_point(EVP_PKEY* key) {
  unsigned char* buf = nullptr;
  std::size_t len = EVP_PKEY_get1_encoded_public_key(key, &buf);
  if (len == 0 || buf == nullptr) fail("cannot encode public key");
  Bytes out(buf, buf + len);
  OPENSSL_free(buf);
  return out;
}

PkeyPtr public_key_from_point(std::span<const std::uint8_t> point) {
  OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
  if (!bld) fail("param build failed");
  OSSL_PARAM_BLD_push_utf8_string(bld, OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1", 0);
  OSSL_PARAM_BLD_push_octet_string(bld, OSSL_PKEY_PARAM_PUB_KEY, point.data(), point.size());
  OSSL_PARAM* params = OSSL_PARAM_BLD_to_param(bld);
  OSSL_PARAM_BLD_free(bld);
  if (!params) fail("param build failed");

  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
  EVP_PKEY* raw = nullptr;
  bool ok = ctx && EVP_PKEY_fromdata_init(ctx.get()) > 0 &&
            EVP_PKEY_fromdata(ctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params) > 0;
  OSSL_PARAM_free(params);
  PkeyPtr key(raw);
  if (!ok || !key) return nullptr;

  // Reject points that are not on the curve.
  PkeyCtxPtr check(EVP_PKEY_CTX_new(key.get(), nullptr));
  if (!check || EVP_PKEY_public_check(check.get()) <= 0) return nullptr;
  return key;
}

Bytes gcm_encrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> iv,
                  std::span<const std::uint8_t> aad, std::span<const std::uint8_t> plaintext) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), iv.data()) <= 0) {
    fail("GCM init failed");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) <= 0) {
    fail("GCM aad failed");
  }
  Bytes out(plaintext.size() + kTagLen);
  if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) <= 0) {
    fail("GCM encrypt failed");
  }
  int total = len;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + total, &len) <= 0) fail("GCM final failed");
  total += len;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagLen, out.data() + total) <= 0) {
    fail("GCM tag failed");
  }
  out.resize(total + kTagLen);
  return out;
}

std::optional<Bytes> gcm_decrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> iv,
                                 std::span<const std::uint8_t> aad,
                                 std::span<const std::uint8_t> ct_and_tag) {
  if (ct_and_tag.size() < kTagLen) return std::nullopt;
  auto ct = ct_and_tag.first(ct_and_tag.size() - kTagLen);
  auto tag = ct_and_tag.last(kTagLen);

  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), iv.data()) <= 0) {
    fail("GCM init failed");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) <= 0) {
    fail("GCM aad failed");
  }
  Bytes out(ct.size());
  if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, ct.data(), static_cast<int>(ct.size())) <= 0) {
    return std::nullopt;
  }
  int total = len;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagLen,
                          const_cast<std::uint8_t*>(tag.data())) <= 0) {
    fail("GCM tag failed");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + total, &len) <= 0) return std::nullopt;
  total += len;
  out.resize(total);
  return out;
}

Bytes derive_keys(std::span<const std::uint8_t> shared, std::span<const std::uint8_t> ephemeral_point,
                  std::string_view context) {
  std::string info = "ztsfc-ecies-v1|";
  info.append(context);
  Bytes info_bytes(info.begin(), info.end());
  return hkdf_sha256(shared, ephemeral_point, info_bytes, kKeyLen + kIvLen);
}

}  // namespace

void PkeyDeleter::operator()(EVP_PKEY* p) const noexcept { EVP_PKEY_free(p); }
void X509Deleter::operator()(X509* c) const noexcept { X509_free(c); }

std::string b64url_encode(std::span<const std::uint8_t> data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
  }
  std::size_t rest = data.size() - i;
  if (rest == 1) {
    std::uint32_t v = data[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
  } else if (rest == 2) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
  }
  return out;
}

std::optional<Bytes> b64url_decode(std::string_view text) {
  static const std::array<int, 256> table = b64_reverse_table();
  if (text.size() % 4 == 1) return std::nullopt;
  Bytes out;
  out.reserve(text.size() / 4 * 3 + 2);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    int v = table[static_cast<unsigned char>(c)];
    if (v < 0) return std::nullopt;
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  // Leftover bits must be zero padding from the encoder.
  if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) return std::nullopt;
  return out;
}

std::string hex_encode(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

std::optional<Bytes> hex_decode(std::string_view text) {
  if (text.size() % 2 != 0) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  out.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    int hi = nibble(text[i]);
    int lo = nibble(text[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

Bytes sha256(std::span<const std::uint8_t> data) {
  Bytes out(32);
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != 32) {
    fail("sha256 failed");
  }
  return out;
}

Bytes sha256(std::string_view data) { return sha256(as_bytes(data)); }

static Bytes hmac(const EVP_MD* md, std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> data) {
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  if (HMAC(md, key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(),
           &len) == nullptr) {
    fail("hmac failed");
  }
  out.resize(len);
  return out;
}

Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data) {
  return hmac(EVP_sha256(), key, data);
}

Bytes hmac_sha1(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data) {
  return hmac(EVP_sha1(), key, data);
}

Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) fail("RAND_bytes failed");
  return out;
}

bool ct_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

PkeyPtr generate_p256_key() {
  EVP_PKEY* raw = EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256");
  if (!raw) fail("P-256 keygen failed");
  return PkeyPtr(raw);
}

PkeyPtr load_private_key_file(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "r");
  if (!f) fail("cannot open private key: " + path);
  EVP_PKEY* raw = PEM_read_PrivateKey(f, nullptr, nullptr, nullptr);
  std::fclose(f);
  if (!raw) fail("cannot parse private key: " + path);
  return PkeyPtr(raw);
}

X509Ptr load_certificate_file(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "r");
  if (!f) fail("cannot open certificate: " + path);
  X509* raw = PEM_read_X509(f, nullptr, nullptr, nullptr);
  std::fclose(f);
  if (!raw) fail("cannot parse certificate: " + path);
  return X509Ptr(raw);
}

PkeyPtr public_key_of_certificate(const std::string& cert_path) {
  X509Ptr cert = load_certificate_file(cert_path);
  EVP_PKEY* raw = X509_get_pubkey(cert.get());
  if (!raw) fail("certificate has no public key: " + cert_path);
  return PkeyPtr(raw);
}

std::string certificate_common_name(X509* cert) {
  if (!cert) return {};
  char buf[256] = {0};
  int n = X509_NAME_get_text_by_NID(X509_get_subject_name(cert), NID_commonName, buf, sizeof(buf));
  if (n <= 0) return {};
  return std::string(buf, static_cast<std::size_t>(n));
}

Bytes ecies_seal(EVP_PKEY* recipient_public, std::span<const std::uint8_t> plaintext,
                 std::string_view context) {
  if (!recipient_public) fail("ecies_seal: null recipient key");
  PkeyPtr ephemeral = generate_p256_key();
  Bytes point = encoded_public_point(ephemeral.get());
  if (point.size() != kPointLen) fail("unexpected point encoding");

  Bytes shared = ecdh_shared_secret(ephemeral.get(), recipient_public);
  Bytes keys = derive_keys(shared, point, context);
  std::span<const std::uint8_t> key(keys.data(), kKeyLen);
  std::span<const std::uint8_t> iv(keys.data() + kKeyLen, kIvLen);

  Bytes ct = gcm_encrypt(key, iv, as_bytes(context), plaintext);
  Bytes blob(point.size() + ct.size());
  std::copy(point.begin(), point.end(), blob.begin());
  std::copy(ct.begin(), ct.end(), blob.begin() + static_cast<std::ptrdiff_t>(point.size()));
  return blob;
}

std::optional<Bytes> ecies_open(EVP_PKEY* recipient_private, std::span<const std::uint8_t> blob,
                                std::string_view context) {
  if (!recipient_private) fail("ecies_open: null recipient key");
  if (blob.size() < kPointLen + kTagLen) return std::nullopt;
  auto point = blob.first(kPointLen);
  auto ct = blob.subspan(kPointLen);

  PkeyPtr ephemeral = public_key_from_point(point);
  if (!ephemeral) return std::nullopt;

  Bytes shared;
  try {
    shared = ecdh_shared_secret(recipient_private, ephemeral.get());
  } catch (const CryptoError&) {
    return std::nullopt;
  }
  Bytes keys = derive_keys(shared, Bytes(point.begin(), point.end()), context);
  std::span<const std::uint8_t> key(keys.data(), kKeyLen);
  std::span<const std::uint8_t> iv(keys.data() + kKeyLen, kIvLen);
  return gcm_decrypt(key, iv, as_bytes(context), ct);
}

}  // namespace ztsfc::crypto
