#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ztsfc/crypto.hpp"
#include "ztsfc/http_common.hpp"
#include "ztsfc/trust.hpp"

namespace ztsfc::chain {

// Custom header fields carrying the chain state. Everything under X-SFC-*
// plus the device assertion is internal and never reaches client or service
// unstripped.
inline constexpr const char* kChainHeader = "X-SFC-Chain";
inline constexpr const char* kSealedChainHeader = "X-SFC-Sealed-Chain";
inline constexpr const char* kPotHeader = "X-SFC-PoT";
inline constexpr const char* kRequestIdHeader = "X-SFC-Request-ID";
inline constexpr const char* kChallengeHeader = "X-SFC-Challenge";
inline constexpr const char* kDropHeader = "X-SFC-Drop";

// -- plain mode ---------------------------------------------------------------

// Comma-joined `host:port` entries in hop order. An empty hop list produces
// no header at all, hence the optional.
std::optional<std::string> encode_chain(const std::vector<std::string>& hops);

// Throws CodecError on empty input or any malformed entry.
std::vector<std::string> parse_chain(std::string_view value);

struct Popped {
  std::string next;
  std::optional<std::string> remaining;  // absent after the last hop
};

// Destructive pop: first entry out, rest re-encoded.
Popped pop_next_hop(std::string_view value);

// -- sealed mode --------------------------------------------------------------

// One chain entry encrypted to the function that must read it. Wire form is
// `<recipient>.<b64url blob>`; recipient ids are [A-Za-z0-9_-]+ so the dot
// cannot collide with either side.
struct SealedEntry {
  FunctionId recipient;
  crypto::Bytes ciphertext;

  std::string wire() const;
};

struct SealSpec {
  FunctionId reader;    // function whose key opens this entry
  std::string address;  // next-hop payload it will recover
};

// Seals every entry to its reader's public key. Throws ConfigError when a
// reader's key is missing: a partially sealed chain must never leave the PEP.
std::string seal_chain(const std::vector<SealSpec>& entries,
                       const std::map<FunctionId, EVP_PKEY*>& keys);

std::vector<SealedEntry> parse_sealed_chain(std::string_view value);

std::optional<std::string> encode_sealed_chain(const std::vector<SealedEntry>& entries);

// Empty optional on authenticated-decryption failure (tampering, wrong key,
// misrouted entry).
std::optional<std::string> open_entry(const SealedEntry& entry, EVP_PKEY* private_key);

// -- header hygiene -----------------------------------------------------------

bool is_internal_header(std::string_view name);

// Removes X-SFC-* and X-Device-Assertion; everything else untouched.
void strip_internal_headers(Headers& headers);

}  // namespace ztsfc::chain
