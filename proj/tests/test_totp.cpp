#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/totp_oracle.hpp"
#include "ztsfc/totp.hpp"

using namespace ztsfc;
using crypto::Bytes;

namespace {
const Bytes kRfcSecret = {'1', '2', '3', '4', '5', '6', '7', '8', '9', '0',
                          '1', '2', '3', '4', '5', '6', '7', '8', '9', '0'};
}

TEST_CASE("base32 RFC 4648 vectors") {
  auto dec = [](const char* s) { return totp::base32_decode(s); };
  CHECK(totp::base32_encode(Bytes{}) == "");
  CHECK(totp::base32_encode(Bytes{'f'}) == "MY");
  CHECK(totp::base32_encode(Bytes{'f', 'o'}) == "MZXQ");
  CHECK(totp::base32_encode(Bytes{'f', 'o', 'o'}) == "MZXW6");
  CHECK(totp::base32_encode(Bytes{'f', 'o', 'o', 'b'}) == "MZXW6YQ");
  CHECK(totp::base32_encode(Bytes{'f', 'o', 'o', 'b', 'a', 'r'}) == "MZXW6YTBOI");
  CHECK(*dec("MZXW6YTBOI") == Bytes{'f', 'o', 'o', 'b', 'a', 'r'});
  CHECK(*dec("mzxw6ytboi======") == Bytes{'f', 'o', 'o', 'b', 'a', 'r'});
  CHECK_FALSE(dec("MZ1W6").has_value());  // '1' not in alphabet
}

TEST_CASE("RFC 6238 SHA-1 reference codes") {
  // Appendix B of RFC 6238, 8-digit codes, 30 s steps.
  struct Vector {
    std::int64_t t;
    const char* code;
  };
  const Vector vectors[] = {
      {59, "94287082"},         {1111111109, "07081804"}, {1111111111, "14050471"},
      {1234567890, "89005924"}, {2000000000, "69279037"}, {20000000000, "65353130"},
  };
  for (const auto& v : vectors) {
    CHECK(totp::code_at(kRfcSecret, v.t, 30, 8) == v.code);
  }
}

TEST_CASE("production codes agree with the independent oracle") {
  std::mt19937 rng(11);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<std::uint8_t> secret(16 + rng() % 16);
    for (auto& b : secret) b = static_cast<std::uint8_t>(rng());
    std::int64_t t = static_cast<std::int64_t>(rng()) * 7 + 59;
    std::string expect = test_oracle::totp_code(secret, t, 30, 6);
    CHECK(totp::code_at(Bytes(secret.begin(), secret.end()), t, 30, 6) == expect);
  }
}

TEST_CASE("verify_window accepts exactly the -1..+1 step codes") {
  Bytes secret(20, 0xa7);
  const std::int64_t now = 1700000015;  // mid-step
  std::string prev = totp::code_at(secret, now - 30);
  std::string cur = totp::code_at(secret, now);
  std::string next = totp::code_at(secret, now + 30);
  std::string far = totp::code_at(secret, now + 90);

  CHECK(totp::verify_window(secret, prev, now));
  CHECK(totp::verify_window(secret, cur, now));
  CHECK(totp::verify_window(secret, next, now));
  CHECK_FALSE(totp::verify_window(secret, far, now));
  CHECK_FALSE(totp::verify_window(secret, "000000", now));
  CHECK_FALSE(totp::verify_window(secret, "12345", now));    // wrong length
  CHECK_FALSE(totp::verify_window(secret, "12a456", now));   // non-digit
}

TEST_CASE("oracle sha1 self-check against FIPS vector") {
  std::vector<std::uint8_t> abc{'a', 'b', 'c'};
  auto digest = test_oracle::sha1(abc);
  const std::uint8_t expect[20] = {0xa9, 0x99, 0x3e, 0x36, 0x47, 0x06, 0x81, 0x6a, 0xba, 0x3e,
                                   0x25, 0x71, 0x78, 0x50, 0xc2, 0x6c, 0x9c, 0xd0, 0xd8, 0x9d};
  CHECK(std::equal(digest.begin(), digest.end(), expect));
}
