#include "ztsfc/pot.hpp"

#include <algorithm>
#include <map>

#include "ztsfc/errors.hpp"

namespace ztsfc::pot {
namespace {

constexpr std::string_view kContext = "ztsfc/pot";
constexpr std::size_t kDigestLen = 32;
constexpr std::size_t kFixedLen = kRequestIdLen + 8 + kDigestLen;

void put_be64(crypto::Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint64_t get_be64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::string make_token(const crypto::Bytes& request_id, const FunctionId& function_id,
                       const crypto::Bytes& request_digest, EVP_PKEY* verifier_public,
                       std::int64_t issued_at) {
  if (request_id.size() != kRequestIdLen)
    throw CodecError("pot: request id must be 16 bytes");
  if (request_digest.size() != kDigestLen)
    throw CodecError("pot: request digest must be 32 bytes");
  if (function_id.empty()) throw CodecError("pot: empty function id");

  crypto::Bytes plain;
  plain.reserve(kFixedLen + function_id.size());
  plain.insert(plain.end(), request_id.begin(), request_id.end());
  put_be64(plain, static_cast<std::uint64_t>(issued_at));
  plain.insert(plain.end(), request_digest.begin(), request_digest.end());
  plain.insert(plain.end(), function_id.begin(), function_id.end());

  return crypto::b64url_encode(crypto::ecies_seal(verifier_public, plain, kContext));
}

std::optional<Token> open_token(std::string_view token_b64, EVP_PKEY* verifier_private) {
  auto blob = crypto::b64url_decode(token_b64);
  if (!blob) return std::nullopt;
  auto plain = crypto::ecies_open(verifier_private, *blob, kContext);
  if (!plain || plain->size() <= kFixedLen) return std::nullopt;

  Token token;
  token.request_id.assign(plain->begin(), plain->begin() + kRequestIdLen);
  token.issued_at = static_cast<std::int64_t>(get_be64(plain->data() + kRequestIdLen));
  token.digest.assign(plain->begin() + kRequestIdLen + 8,
                      plain->begin() + kFixedLen);
  token.function_id.assign(plain->begin() + kFixedLen, plain->end());
  return token;
}

std::vector<std::string> split_header(std::string_view value) {
  std::vector<std::string> out;
  if (value.empty()) return out;
  size_t start = 0;
  while (true) {
    size_t comma = value.find(',', start);
    out.emplace_back(value.substr(
        start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join_header(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out += ',';
    out += token;
  }
  return out;
}

VerifyResult verify(const std::vector<std::string>& tokens,
                    const std::vector<FunctionId>& planned,
                    const crypto::Bytes& request_id, const crypto::Bytes& request_digest,
                    EVP_PKEY* verifier_private) {
  std::map<FunctionId, int> seen;
  for (const auto& raw : tokens) {
    auto token = open_token(raw, verifier_private);
    if (!token) return VerifyResult::fail("changed: unreadable token");
    if (!crypto::ct_equal(token->request_id, request_id))
      return VerifyResult::fail("replayed: token bound to another request");
    if (!crypto::ct_equal(token->digest, request_digest))
      return VerifyResult::fail("changed: request digest mismatch");
    ++seen[token->function_id];
  }
  for (const auto& fn : planned) {
    auto it = seen.find(fn);
    if (it == seen.end() || it->second == 0)
      return VerifyResult::fail("absent: no token from '" + fn + "'");
    if (it->second > 1)
      return VerifyResult::fail("duplicate: multiple tokens from '" + fn + "'");
    it->second = -1;  // consumed
  }
  for (const auto& [fn, count] : seen) {
    if (count != -1)
      return VerifyResult::fail("unexpected: token from unplanned '" + fn + "'");
  }
  return VerifyResult::pass();
}

}  // namespace ztsfc::pot
