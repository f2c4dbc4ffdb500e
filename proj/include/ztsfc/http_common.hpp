#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ztsfc/crypto.hpp"

namespace ztsfc {

struct CiLess {
  bool operator()(const std::string& a, const std::string& b) const noexcept;
};

bool ci_equal(std::string_view a, std::string_view b) noexcept;

// Header names compare case-insensitively; values keep their bytes.
using Headers = std::multimap<std::string, std::string, CiLess>;

std::optional<std::string> get_header(const Headers& headers, const std::string& name);

struct HostPort {
  std::string host;
  std::uint16_t port = 0;

  std::string text() const { return host + ":" + std::to_string(port); }
};

// Strict `host:port` with host limited to [A-Za-z0-9.-]. Empty optional on
// anything else; chain entries and registry addresses must pass this.
std::optional<HostPort> parse_host_port(std::string_view address);

// Same grammar, but admits port 0 ("let the kernel pick") for listeners.
std::optional<HostPort> parse_listen_address(std::string_view address);

// Digest binding a request to its proof-of-transit tokens: SHA-256 over
// method, request-target, and the hex SHA-256 of the body. Headers are
// excluded; hops legitimately rewrite them.
crypto::Bytes canonical_request_digest(std::string_view method, std::string_view target,
                                       std::string_view body);

}  // namespace ztsfc
