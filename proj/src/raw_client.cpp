#include "ztsfc/raw_client.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/err.h>

#include <cstring>

#include "ztsfc/tls.hpp"

namespace ztsfc::raw {
namespace {

std::string ssl_error_text() {
  unsigned long code = ERR_get_error();
  if (code == 0) return "unknown TLS error";
  char buf[256];
  ERR_error_string_n(code, buf, sizeof buf);
  ERR_clear_error();
  return buf;
}

int dial(const std::string& host, std::uint16_t port, std::string* error) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &found) != 0) {
    *error = "cannot resolve " + host;
    return -1;
  }
  int fd = -1;
  for (auto* ai = found; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(found);
  if (fd < 0) *error = "tcp connect to " + host + ":" + std::to_string(port) + " failed";
  return fd;
}

// Minimal response parse: status line, header block, Content-Length or
// read-to-close body. `data` is everything received on the connection.
std::optional<HttpResponse> parse_response(const std::string& data) {
  auto line_end = data.find("\r\n");
  if (line_end == std::string::npos) return std::nullopt;
  std::string status_line = data.substr(0, line_end);
  if (status_line.size() < 12 || status_line.compare(0, 5, "HTTP/") != 0) return std::nullopt;
  auto sp = status_line.find(' ');
  if (sp == std::string::npos || sp + 4 > status_line.size()) return std::nullopt;

  HttpResponse res;
  res.status = std::atoi(status_line.c_str() + sp + 1);
  if (res.status < 100) return std::nullopt;

  auto block_end = data.find("\r\n\r\n", line_end);
  if (block_end == std::string::npos) return std::nullopt;
  std::size_t pos = line_end + 2;
  while (pos < block_end) {
    auto eol = data.find("\r\n", pos);
    auto colon = data.find(':', pos);
    if (colon == std::string::npos || colon > eol) return std::nullopt;
    std::string name = data.substr(pos, colon - pos);
    std::size_t vstart = colon + 1;
    while (vstart < eol && data[vstart] == ' ') ++vstart;
    res.headers.emplace(name, data.substr(vstart, eol - vstart));
    pos = eol + 2;
  }

  res.body = data.substr(block_end + 4);
  if (auto len = get_header(res.headers, "Content-Length"))
    res.body.resize(std::min(res.body.size(), static_cast<std::size_t>(std::stoul(*len))));
  return res;
}

}  // namespace

RawTlsClient::RawTlsClient(std::string host, std::uint16_t port, ClientIdentity identity)
    : host_(std::move(host)), port_(port), identity_(std::move(identity)) {}

RawTlsClient::~RawTlsClient() { close(); }

bool RawTlsClient::connect() {
  fd_ = dial(host_, port_, &error_);
  if (fd_ < 0) return false;
  tcp_connected_ = true;

  int flag = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &flag, sizeof flag);

  ctx_ = SSL_CTX_new(TLS_client_method());
  if (!ctx_) {
    error_ = ssl_error_text();
    return false;
  }
  if (SSL_CTX_load_verify_locations(ctx_, identity_.ca.c_str(), nullptr) != 1) {
    error_ = "cannot load trust anchor " + identity_.ca;
    return false;
  }
  SSL_CTX_set_verify(ctx_, SSL_VERIFY_PEER, nullptr);
  if (!identity_.cert.empty()) {
    if (SSL_CTX_use_certificate_chain_file(ctx_, identity_.cert.c_str()) != 1 ||
        SSL_CTX_use_PrivateKey_file(ctx_, identity_.key.c_str(), SSL_FILETYPE_PEM) != 1) {
      error_ = "cannot load client identity " + identity_.cert;
      return false;
    }
  }

  ssl_ = SSL_new(ctx_);
  if (!ssl_) {
    error_ = ssl_error_text();
    return false;
  }
  SSL_set_fd(ssl_, fd_);
  SSL_set_tlsext_host_name(ssl_, host_.c_str());
  if (SSL_connect(ssl_) != 1) {
    error_ = "handshake: " + ssl_error_text();
    return false;
  }
  handshake_ok_ = true;
  return true;
}

std::string RawTlsClient::channel_binding() const {
  if (!handshake_ok_) return "";
  return tls::channel_binding(ssl_);
}

std::optional<HttpResponse> RawTlsClient::request(
    const std::string& method, const std::string& target,
    const std::vector<std::pair<std::string, std::string>>& headers, std::string_view body) {
  if (!handshake_ok_) {
    error_ = "not connected";
    return std::nullopt;
  }

  std::string wire = method + " " + target + " HTTP/1.1\r\n";
  wire += "Host: " + host_ + ":" + std::to_string(port_) + "\r\n";
  for (const auto& [name, value] : headers) wire += name + ": " + value + "\r\n";
  wire += "Content-Length: " + std::to_string(body.size()) + "\r\n";
  wire += "Connection: close\r\n\r\n";
  wire.append(body);

  std::size_t sent = 0;
  while (sent < wire.size()) {
    int n = SSL_write(ssl_, wire.data() + sent, static_cast<int>(wire.size() - sent));
    if (n <= 0) {
      error_ = "write: " + ssl_error_text();
      return std::nullopt;
    }
    sent += static_cast<std::size_t>(n);
  }

  std::string data;
  char buf[8192];
  for (;;) {
    int n = SSL_read(ssl_, buf, sizeof buf);
    if (n > 0) {
      data.append(buf, static_cast<std::size_t>(n));
      bytes_received_ += static_cast<std::size_t>(n);
      continue;
    }
    int reason = SSL_get_error(ssl_, n);
    if (reason == SSL_ERROR_ZERO_RETURN) break;  // clean close_notify
    // Connection torn down some other way; whatever arrived is all there is.
    if (data.empty()) {
      error_ = "read: " + ssl_error_text();
      return std::nullopt;
    }
    break;
  }

  auto parsed = parse_response(data);
  if (!parsed) error_ = "unparseable response (" + std::to_string(data.size()) + " bytes)";
  return parsed;
}

void RawTlsClient::close() {
  if (ssl_) {
    SSL_shutdown(ssl_);
    SSL_free(ssl_);
    ssl_ = nullptr;
  }
  if (ctx_) {
    SSL_CTX_free(ctx_);
    ctx_ = nullptr;
  }
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  tcp_connected_ = false;
  handshake_ok_ = false;
}

std::optional<HttpResponse> fetch(const std::string& host, std::uint16_t port,
                                  const ClientIdentity& identity, const std::string& method,
                                  const std::string& target,
                                  const std::vector<std::pair<std::string, std::string>>& headers,
                                  std::string_view body, std::string* error) {
  RawTlsClient client(host, port, identity);
  if (!client.connect()) {
    if (error) *error = client.last_error();
    return std::nullopt;
  }
  auto res = client.request(method, target, headers, body);
  if (!res && error) *error = client.last_error();
  return res;
}

}  // namespace ztsfc::raw
