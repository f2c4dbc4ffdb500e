#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ztsfc/crypto.hpp"

namespace ztsfc::totp {

// RFC 4648 base32. Accepts upper/lower case and optional '=' padding.
std::optional<crypto::Bytes> base32_decode(std::string_view text);
std::string base32_encode(std::span<const std::uint8_t> data);

// RFC 4226 HOTP truncation over HMAC-SHA1.
std::uint32_t hotp_sha1(std::span<const std::uint8_t> secret, std::uint64_t counter,
                        unsigned digits);

// RFC 6238 time-based code as a zero-padded decimal string.
std::string code_at(std::span<const std::uint8_t> secret, std::int64_t unix_time,
                    unsigned step_seconds = 30, unsigned digits = 6);

// True iff `code` matches any time step in [now - window, now + window].
bool verify_window(std::span<const std::uint8_t> secret, std::string_view code,
                   std::int64_t unix_time, unsigned step_seconds = 30, unsigned digits = 6,
                   unsigned window = 1);

}  // namespace ztsfc::totp
