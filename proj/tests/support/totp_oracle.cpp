#include "totp_oracle.hpp"

namespace ztsfc::test_oracle {

namespace {

std::uint32_t rotl(std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

}  // namespace

std::vector<std::uint8_t> sha1(const std::vector<std::uint8_t>& data) {
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};

  std::vector<std::uint8_t> msg = data;
  std::uint64_t bit_len = static_cast<std::uint64_t>(msg.size()) * 8;
  msg.push_back(0x80);
  while (msg.size() % 64 != 56) msg.push_back(0x00);
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<std::uint8_t>((bit_len >> (i * 8)) & 0xff));

  for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (static_cast<std::uint32_t>(msg[chunk + i * 4]) << 24) |
             (static_cast<std::uint32_t>(msg[chunk + i * 4 + 1]) << 16) |
             (static_cast<std::uint32_t>(msg[chunk + i * 4 + 2]) << 8) |
             static_cast<std::uint32_t>(msg[chunk + i * 4 + 3]);
    }
    for (int i = 16; i < 80; ++i) w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);

    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | ((~b) & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      std::uint32_t tmp = rotl(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rotl(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  std::vector<std::uint8_t> out(20);
  for (int i = 0; i < 5; ++i) {
    out[i * 4] = static_cast<std::uint8_t>((h[i] >> 24) & 0xff);
    out[i * 4 + 1] = static_cast<std::uint8_t>((h[i] >> 16) & 0xff);
    out[i * 4 + 2] = static_cast<std::uint8_t>((h[i] >> 8) & 0xff);
    out[i * 4 + 3] = static_cast<std::uint8_t>(h[i] & 0xff);
  }
  return out;
}

std::vector<std::uint8_t> hmac_sha1(const std::vector<std::uint8_t>& key,
                                    const std::vector<std::uint8_t>& msg) {
  constexpr std::size_t block = 64;
  std::vector<std::uint8_t> k = key;
  if (k.size() > block) k = sha1(k);
  k.resize(block, 0x00);

  std::vector<std::uint8_t> inner(block), outer(block);
  for (std::size_t i = 0; i < block; ++i) {
    inner[i] = k[i] ^ 0x36;
    outer[i] = k[i] ^ 0x5c;
  }
  inner.insert(inner.end(), msg.begin(), msg.end());
  std::vector<std::uint8_t> inner_hash = sha1(inner);
  outer.insert(outer.end(), inner_hash.begin(), inner_hash.end());
  return sha1(outer);
}

std::string totp_code(const std::vector<std::uint8_t>& secret, std::int64_t unix_time,
                      unsigned step_seconds, unsigned digits) {
  std::uint64_t counter = static_cast<std::uint64_t>(unix_time / step_seconds);
  std::vector<std::uint8_t> msg(8);
  for (int i = 7; i >= 0; --i) {
    msg[i] = static_cast<std::uint8_t>(counter & 0xff);
    counter >>= 8;
  }
  std::vector<std::uint8_t> mac = hmac_sha1(secret, msg);
  std::size_t offset = mac[19] & 0x0f;
  std::uint64_t bin = (static_cast<std::uint64_t>(mac[offset] & 0x7f) << 24) |
                      (static_cast<std::uint64_t>(mac[offset + 1]) << 16) |
                      (static_cast<std::uint64_t>(mac[offset + 2]) << 8) |
                      static_cast<std::uint64_t>(mac[offset + 3]);
  std::uint64_t mod = 1;
  for (unsigned i = 0; i < digits; ++i) mod *= 10;
  std::string s = std::to_string(bin % mod);
  if (s.size() < digits) s.insert(0, digits - s.size(), '0');
  return s;
}

}  // namespace ztsfc::test_oracle
