#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ztsfc/crypto.hpp"
#include "ztsfc/trust.hpp"

namespace ztsfc::pot {

inline constexpr std::size_t kRequestIdLen = 16;

// What each hop attests to. Only the PEP can read it back.
struct Token {
  crypto::Bytes request_id;  // 16 bytes, ties the token to one request
  std::int64_t issued_at = 0;
  crypto::Bytes digest;  // canonical request digest at the time of transit
  FunctionId function_id;
};

// Encrypts one transit attestation to the verifier's public key. The result
// is base64url, ready to join the X-SFC-PoT list.
std::string make_token(const crypto::Bytes& request_id, const FunctionId& function_id,
                       const crypto::Bytes& request_digest, EVP_PKEY* verifier_public,
                       std::int64_t issued_at);

// Empty optional on any decryption or framing failure.
std::optional<Token> open_token(std::string_view token_b64, EVP_PKEY* verifier_private);

std::vector<std::string> split_header(std::string_view value);
std::string join_header(const std::vector<std::string>& tokens);

struct VerifyResult {
  bool ok = false;
  std::string reason;  // "absent <fn>", "changed", "unexpected <fn>", ...

  static VerifyResult pass() { return {true, ""}; }
  static VerifyResult fail(std::string why) { return {false, std::move(why)}; }
};

// Multiset check: every planned function must have contributed exactly one
// readable token bound to this request id and digest; nothing extra may ride
// along. Order is not significant — functions append concurrently-safe.
VerifyResult verify(const std::vector<std::string>& tokens,
                    const std::vector<FunctionId>& planned,
                    const crypto::Bytes& request_id, const crypto::Bytes& request_digest,
                    EVP_PKEY* verifier_private);

}  // namespace ztsfc::pot
