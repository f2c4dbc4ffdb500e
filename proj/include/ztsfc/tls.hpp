#pragma once

#include <memory>
#include <string>

#include <httplib.h>
#include <openssl/ssl.h>

#include "ztsfc/config.hpp"
#include "ztsfc/crypto.hpp"
#include "ztsfc/http_common.hpp"

namespace ztsfc::tls {

// Exporter label binding device assertions to one TLS session.
inline constexpr const char* kChannelBindingLabel = "EXPORTER-ztsfc-device-binding";
inline constexpr std::size_t kChannelBindingLen = 32;

// Keying-material exporter value for an established connection, hex-encoded.
// Both ends of the same connection derive the same value; a MAC over it
// cannot be replayed on another connection.
std::string channel_binding(SSL* ssl);

struct X509StoreDeleter {
  void operator()(X509_STORE* s) const noexcept { X509_STORE_free(s); }
};
using StorePtr = std::unique_ptr<X509_STORE, X509StoreDeleter>;

// Trust store holding the certificates found in one PEM file.
StorePtr load_store(const std::string& ca_path);

// Chain-verifies the connection's peer certificate against `store`.
bool peer_verified(SSL* ssl, X509_STORE* store);

// CN of the peer certificate, empty when no certificate was presented.
std::string peer_common_name(SSL* ssl);

// Mutual-TLS client for one upstream exchange. The CA pins which peers we
// talk to; the cert/key is our own identity.
std::unique_ptr<httplib::SSLClient> make_client(const HostPort& target,
                                                const config::TlsPaths& tls,
                                                int connect_timeout_ms = 10000,
                                                int io_timeout_ms = 30000);

// Forwarding hygiene: connection-scoped fields plus the synthetic entries the
// HTTP library stores alongside real headers.
bool is_transport_header(const std::string& name);

// Copy of `headers` without transport fields (and nothing else).
Headers forwardable_headers(const httplib::Headers& headers);

}  // namespace ztsfc::tls
