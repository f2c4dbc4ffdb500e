#include "ztsfc/totp.hpp"

#include <array>
#include <cctype>

namespace ztsfc::totp {

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";

std::uint64_t pow10(unsigned digits) {
  std::uint64_t v = 1;
  for (unsigned i = 0; i < digits; ++i) v *= 10;
  return v;
}
}  // namespace

std::optional<crypto::Bytes> base32_decode(std::string_view text) {
  // Strip trailing padding first; '=' elsewhere is invalid.
  while (!text.empty() && text.back() == '=') text.remove_suffix(1);
  crypto::Bytes out;
  out.reserve(text.size() * 5 / 8 + 1);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    int v = -1;
    char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (u >= 'A' && u <= 'Z') {
      v = u - 'A';
    } else if (u >= '2' && u <= '7') {
      v = u - '2' + 26;
    } else {
      return std::nullopt;
    }
    acc = (acc << 5) | static_cast<std::uint32_t>(v);
    bits += 5;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) return std::nullopt;
  return out;
}

std::string base32_encode(std::span<const std::uint8_t> data) {
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (auto b : data) {
    acc = (acc << 8) | b;
    bits += 8;
    while (bits >= 5) {
      bits -= 5;
      out.push_back(kAlphabet[(acc >> bits) & 31]);
    }
  }
  if (bits > 0) out.push_back(kAlphabet[(acc << (5 - bits)) & 31]);
  return out;
}

std::uint32_t hotp_sha1(std::span<const std::uint8_t> secret, std::uint64_t counter,
                        unsigned digits) {
  std::array<std::uint8_t, 8> msg{};
  for (int i = 7; i >= 0; --i) {
    msg[i] = static_cast<std::uint8_t>(counter & 0xff);
    counter >>= 8;
  }
  crypto::Bytes mac = crypto::hmac_sha1(secret, msg);
  std::size_t offset = mac[mac.size() - 1] & 0x0f;
  std::uint32_t bin = (static_cast<std::uint32_t>(mac[offset] & 0x7f) << 24) |
                      (static_cast<std::uint32_t>(mac[offset + 1]) << 16) |
                      (static_cast<std::uint32_t>(mac[offset + 2]) << 8) |
                      static_cast<std::uint32_t>(mac[offset + 3]);
  return static_cast<std::uint32_t>(bin % pow10(digits));
}

std::string code_at(std::span<const std::uint8_t> secret, std::int64_t unix_time,
                    unsigned step_seconds, unsigned digits) {
  std::uint64_t counter = static_cast<std::uint64_t>(unix_time / step_seconds);
  std::uint32_t v = hotp_sha1(secret, counter, digits);
  std::string s = std::to_string(v);
  if (s.size() < digits) s.insert(0, digits - s.size(), '0');
  return s;
}

bool verify_window(std::span<const std::uint8_t> secret, std::string_view code,
                   std::int64_t unix_time, unsigned step_seconds, unsigned digits,
                   unsigned window) {
  if (code.size() != digits) return false;
  for (char c : code) {
    if (c < '0' || c > '9') return false;
  }
  std::int64_t step = static_cast<std::int64_t>(step_seconds);
  bool ok = false;
  // Check every step in the window; no early exit, comparisons are cheap.
  for (int offset = -static_cast<int>(window); offset <= static_cast<int>(window); ++offset) {
    std::int64_t t = unix_time + offset * step;
    if (t < 0) continue;
    std::string expect = code_at(secret, t, step_seconds, digits);
    if (expect.size() == code.size() &&
        crypto::ct_equal(crypto::as_bytes(expect), crypto::as_bytes(code))) {
      ok = true;
    }
  }
  return ok;
}

}  // namespace ztsfc::totp
