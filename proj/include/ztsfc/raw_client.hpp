#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <openssl/ssl.h>

#include "ztsfc/http_common.hpp"

namespace ztsfc::raw {

// Identity material for one client. cert/key empty = anonymous TLS.
struct ClientIdentity {
  std::string ca;  // trust anchor for the server being dialed
  std::string cert;
  std::string key;
};

struct HttpResponse {
  int status = 0;
  Headers headers;
  std::string body;
};

// Hand-rolled HTTP/1.1-over-TLS client. Exists so tests control every byte
// they send, can read the connection's channel binding before composing
// headers, and can tell "handshake refused" apart from "server answered".
class RawTlsClient {
 public:
  RawTlsClient(std::string host, std::uint16_t port, ClientIdentity identity);
  ~RawTlsClient();

  RawTlsClient(const RawTlsClient&) = delete;
  RawTlsClient& operator=(const RawTlsClient&) = delete;

  // TCP connect + TLS handshake. Note: under TLS 1.3 a server that rejects
  // our certificate may only surface the alert on the first read, so a true
  // return is not yet proof of acceptance.
  bool connect();

  bool tcp_connected() const { return tcp_connected_; }
  bool handshake_ok() const { return handshake_ok_; }

  // Exporter value for this connection; empty before the handshake.
  std::string channel_binding() const;

  // Sends one request (adds Host, Content-Length, Connection: close) and
  // reads the response. Pairs of `headers` go on the wire in order, verbatim.
  std::optional<HttpResponse> request(
      const std::string& method, const std::string& target,
      const std::vector<std::pair<std::string, std::string>>& headers,
      std::string_view body);

  // Raw HTTP bytes received after the handshake; stays 0 when the peer only
  // ever spoke TLS alerts.
  std::size_t bytes_received() const { return bytes_received_; }
  const std::string& last_error() const { return error_; }

  void close();

 private:
  std::string host_;
  std::uint16_t port_;
  ClientIdentity identity_;
  int fd_ = -1;
  SSL_CTX* ctx_ = nullptr;
  SSL* ssl_ = nullptr;
  bool tcp_connected_ = false;
  bool handshake_ok_ = false;
  std::size_t bytes_received_ = 0;
  std::string error_;
};

// One-shot helper: connect, send, read, close.
std::optional<HttpResponse> fetch(const std::string& host, std::uint16_t port,
                                  const ClientIdentity& identity, const std::string& method,
                                  const std::string& target,
                                  const std::vector<std::pair<std::string, std::string>>& headers,
                                  std::string_view body, std::string* error = nullptr);

}  // namespace ztsfc::raw
