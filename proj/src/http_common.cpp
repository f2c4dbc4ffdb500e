#include "ztsfc/http_common.hpp"

#include <cctype>

namespace ztsfc {

bool CiLess::operator()(const std::string& a, const std::string& b) const noexcept {
  auto lower = [](unsigned char c) { return std::tolower(c); };
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int la = lower(a[i]), lb = lower(b[i]);
    if (la != lb) return la < lb;
  }
  return a.size() < b.size();
}

bool ci_equal(std::string_view a, std::string_view b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

std::optional<std::string> get_header(const Headers& headers, const std::string& name) {
  auto it = headers.find(name);
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

std::optional<HostPort> parse_listen_address(std::string_view address) {
  std::size_t colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  std::string_view host = address.substr(0, colon);
  std::string_view port = address.substr(colon + 1);
  if (port.empty() || port.size() > 5) return std::nullopt;
  for (char c : host) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') return std::nullopt;
  }
  std::uint32_t value = 0;
  for (char c : port) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    value = value * 10 + static_cast<std::uint32_t>(c - '0');
  }
  if (value > 65535) return std::nullopt;
  return HostPort{std::string(host), static_cast<std::uint16_t>(value)};
}

std::optional<HostPort> parse_host_port(std::string_view address) {
  auto parsed = parse_listen_address(address);
  if (parsed && parsed->port == 0) return std::nullopt;
  return parsed;
}

crypto::Bytes canonical_request_digest(std::string_view method, std::string_view target,
                                       std::string_view body) {
  std::string canonical;
  canonical.reserve(method.size() + target.size() + 70);
  canonical.append(method);
  canonical.push_back('\n');
  canonical.append(target);
  canonical.push_back('\n');
  canonical.append(crypto::hex_encode(crypto::sha256(body)));
  return crypto::sha256(canonical);
}

}  // namespace ztsfc
