#include "ztsfc/chain_codec.hpp"

#include <algorithm>
#include <cctype>

#include "ztsfc/errors.hpp"

namespace ztsfc::chain {
namespace {

bool valid_function_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

std::vector<std::string> split_csv(std::string_view value, const char* what) {
  if (value.empty()) throw CodecError(std::string(what) + ": empty header value");
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = value.find(',', start);
    std::string_view item = value.substr(start, comma == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : comma - start);
    if (item.empty()) throw CodecError(std::string(what) + ": empty list entry");
    out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::optional<std::string> encode_chain(const std::vector<std::string>& hops) {
  if (hops.empty()) return std::nullopt;
  std::string out;
  for (const auto& hop : hops) {
    if (!parse_host_port(hop))
      throw CodecError("chain: malformed address '" + hop + "'");
    if (!out.empty()) out += ',';
    out += hop;
  }
  return out;
}

std::vector<std::string> parse_chain(std::string_view value) {
  auto items = split_csv(value, "chain");
  for (const auto& item : items) {
    if (!parse_host_port(item))
      throw CodecError("chain: malformed address '" + item + "'");
  }
  return items;
}

Popped pop_next_hop(std::string_view value) {
  auto items = parse_chain(value);
  Popped popped;
  popped.next = items.front();
  items.erase(items.begin());
  popped.remaining = encode_chain(items);
  return popped;
}

std::string SealedEntry::wire() const {
  return recipient + "." + crypto::b64url_encode(ciphertext);
}

std::string seal_chain(const std::vector<SealSpec>& entries,
                       const std::map<FunctionId, EVP_PKEY*>& keys) {
  if (entries.empty()) throw CodecError("sealed chain: no entries to seal");
  std::string out;
  for (const auto& spec : entries) {
    if (!valid_function_id(spec.reader))
      throw CodecError("sealed chain: invalid reader id '" + spec.reader + "'");
    if (!parse_host_port(spec.address))
      throw CodecError("sealed chain: malformed address '" + spec.address + "'");
    auto it = keys.find(spec.reader);
    if (it == keys.end() || it->second == nullptr)
      throw ConfigError("sealed chain: no public key for reader '" + spec.reader + "'");
    SealedEntry entry;
    entry.recipient = spec.reader;
    entry.ciphertext =
        crypto::ecies_seal(it->second, crypto::as_bytes(spec.address),
                           "ztsfc/entry/" + spec.reader);
    if (!out.empty()) out += ',';
    out += entry.wire();
  }
  return out;
}

std::vector<SealedEntry> parse_sealed_chain(std::string_view value) {
  auto items = split_csv(value, "sealed chain");
  std::vector<SealedEntry> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    size_t dot = item.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= item.size())
      throw CodecError("sealed chain: malformed entry");
    SealedEntry entry;
    entry.recipient = item.substr(0, dot);
    if (!valid_function_id(entry.recipient))
      throw CodecError("sealed chain: invalid recipient id");
    auto blob = crypto::b64url_decode(item.substr(dot + 1));
    if (!blob) throw CodecError("sealed chain: entry is not valid base64url");
    entry.ciphertext = std::move(*blob);
    out.push_back(std::move(entry));
  }
  return out;
}

std::optional<std::string> encode_sealed_chain(const std::vector<SealedEntry>& entries) {
  if (entries.empty()) return std::nullopt;
  std::string out;
  for (const auto& entry : entries) {
    if (!out.empty()) out += ',';
    out += entry.wire();
  }
  return out;
}

std::optional<std::string> open_entry(const SealedEntry& entry, EVP_PKEY* private_key) {
  auto plain =
      crypto::ecies_open(private_key, entry.ciphertext, "ztsfc/entry/" + entry.recipient);
  if (!plain) return std::nullopt;
  std::string address = crypto::to_string(*plain);
  if (!parse_host_port(address)) return std::nullopt;
  return address;
}

bool is_internal_header(std::string_view name) {
  static constexpr std::string_view kPrefix = "x-sfc-";
  if (name.size() >= kPrefix.size()) {
    bool prefixed = std::equal(kPrefix.begin(), kPrefix.end(), name.begin(),
                               [](char a, char b) {
                                 return std::tolower(static_cast<unsigned char>(b)) == a;
                               });
    if (prefixed) return true;
  }
  return ci_equal(name, kDeviceAssertionHeader);
}

void strip_internal_headers(Headers& headers) {
  for (auto it = headers.begin(); it != headers.end();) {
    if (is_internal_header(it->first))
      it = headers.erase(it);
    else
      ++it;
  }
}

}  // namespace ztsfc::chain
