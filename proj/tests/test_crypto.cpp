#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ztsfc/crypto.hpp"
#include "ztsfc/errors.hpp"

using namespace ztsfc;
using crypto::Bytes;

namespace {
Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }
}  // namespace

TEST_CASE("b64url round-trips random buffers") {
  std::mt19937 rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    std::size_t n = rng() % 64;
    Bytes data(n);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    std::string enc = crypto::b64url_encode(data);
    CHECK(enc.find('=') == std::string::npos);
    CHECK(enc.find('+') == std::string::npos);
    CHECK(enc.find('/') == std::string::npos);
    auto dec = crypto::b64url_decode(enc);
    REQUIRE(dec.has_value());
    CHECK(*dec == data);
  }
}

TEST_CASE("b64url RFC 4648 vectors") {
  CHECK(crypto::b64url_encode(bytes_of("")) == "");
  CHECK(crypto::b64url_encode(bytes_of("f")) == "Zg");
  CHECK(crypto::b64url_encode(bytes_of("fo")) == "Zm8");
  CHECK(crypto::b64url_encode(bytes_of("foo")) == "Zm9v");
  CHECK(crypto::b64url_encode(bytes_of("foob")) == "Zm9vYg");
  CHECK(crypto::b64url_encode(Bytes{0xfb, 0xff}) == "-_8");
}

TEST_CASE("b64url rejects foreign characters and padding") {
  CHECK_FALSE(crypto::b64url_decode("Zm9v=").has_value());
  CHECK_FALSE(crypto::b64url_decode("Zm+v").has_value());
  CHECK_FALSE(crypto::b64url_decode("Zm/v").has_value());
  CHECK_FALSE(crypto::b64url_decode("a").has_value());
  CHECK_FALSE(crypto::b64url_decode("ab cd").has_value());
}

TEST_CASE("hex round-trip and rejection") {
  Bytes data{0x00, 0x0f, 0xa5, 0xff};
  CHECK(crypto::hex_encode(data) == "000fa5ff");
  auto dec = crypto::hex_decode("000FA5ff");
  REQUIRE(dec.has_value());
  CHECK(*dec == data);
  CHECK_FALSE(crypto::hex_decode("0g").has_value());
  CHECK_FALSE(crypto::hex_decode("abc").has_value());
}

TEST_CASE("sha256 matches known vector") {
  // SHA-256("abc"), FIPS 180-2 appendix.
  CHECK(crypto::hex_encode(crypto::sha256(std::string_view("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hmac-sha256 matches RFC 4231 case 2") {
  Bytes key = bytes_of("Jefe");
  Bytes msg = bytes_of("what do ya want for nothing?");
  CHECK(crypto::hex_encode(crypto::hmac_sha256(key, msg)) ==
        "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST_CASE("hmac-sha1 matches RFC 2202 case 2") {
  Bytes key = bytes_of("Jefe");
  Bytes msg = bytes_of("what do ya want for nothing?");
  CHECK(crypto::hex_encode(crypto::hmac_sha1(key, msg)) ==
        "effcdf6ae5eb2fa2d27416d5f184df9c259a7c79");
}

TEST_CASE("ct_equal") {
  CHECK(crypto::ct_equal(bytes_of("abc"), bytes_of("abc")));
  CHECK_FALSE(crypto::ct_equal(bytes_of("abc"), bytes_of("abd")));
  CHECK_FALSE(crypto::ct_equal(bytes_of("abc"), bytes_of("ab")));
  CHECK(crypto::ct_equal(Bytes{}, Bytes{}));
}

TEST_CASE("ecies seal/open round-trip") {
  auto key = crypto::generate_p256_key();
  Bytes msg = bytes_of("10.0.0.7:9000");
  Bytes blob = crypto::ecies_seal(key.get(), msg, "test-context");
  auto opened = crypto::ecies_open(key.get(), blob, "test-context");
  REQUIRE(opened.has_value());
  CHECK(*opened == msg);
}

TEST_CASE("ecies produces fresh ciphertext per call") {
  auto key = crypto::generate_p256_key();
  Bytes msg = bytes_of("same input");
  Bytes a = crypto::ecies_seal(key.get(), msg, "ctx");
  Bytes b = crypto::ecies_seal(key.get(), msg, "ctx");
  CHECK(a != b);
}

TEST_CASE("ecies rejects wrong recipient") {
  auto alice = crypto::generate_p256_key();
  auto bob = crypto::generate_p256_key();
  Bytes blob = crypto::ecies_seal(alice.get(), bytes_of("secret"), "ctx");
  CHECK_FALSE(crypto::ecies_open(bob.get(), blob, "ctx").has_value());
}

TEST_CASE("ecies rejects wrong context") {
  auto key = crypto::generate_p256_key();
  Bytes blob = crypto::ecies_seal(key.get(), bytes_of("secret"), "ctx-a");
  CHECK_FALSE(crypto::ecies_open(key.get(), blob, "ctx-b").has_value());
}

TEST_CASE("ecies rejects every single-byte flip") {
  auto key = crypto::generate_p256_key();
  Bytes blob = crypto::ecies_seal(key.get(), bytes_of("flip me"), "ctx");
  for (std::size_t i = 0; i < blob.size(); ++i) {
    Bytes tampered = blob;
    tampered[i] ^= 0x01;
    CHECK_FALSE(crypto::ecies_open(key.get(), tampered, "ctx").has_value());
  }
}

TEST_CASE("ecies rejects truncated blobs") {
  auto key = crypto::generate_p256_key();
  Bytes blob = crypto::ecies_seal(key.get(), bytes_of("short"), "ctx");
  CHECK_FALSE(crypto::ecies_open(key.get(), Bytes(blob.begin(), blob.begin() + 10), "ctx").has_value());
  CHECK_FALSE(crypto::ecies_open(key.get(), Bytes{}, "ctx").has_value());
}

TEST_CASE("random_bytes yields requested length and varies") {
  Bytes a = crypto::random_bytes(16);
  Bytes b = crypto::random_bytes(16);
  CHECK(a.size() == 16);
  CHECK(b.size() == 16);
  CHECK(a != b);
}
