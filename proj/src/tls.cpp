#include "ztsfc/tls.hpp"

#include <openssl/pem.h>
#include <openssl/x509v3.h>

#include <chrono>
#include <cstring>

#include "ztsfc/errors.hpp"

namespace ztsfc::tls {

std::string channel_binding(SSL* ssl) {
  if (!ssl) return {};
  unsigned char out[kChannelBindingLen];
  if (SSL_export_keying_material(ssl, out, sizeof(out), kChannelBindingLabel,
                                 std::strlen(kChannelBindingLabel), nullptr, 0, 0) != 1)
    return {};
  return crypto::hex_encode(crypto::Bytes(out, out + sizeof(out)));
}

StorePtr load_store(const std::string& ca_path) {
  BIO* bio = BIO_new_file(ca_path.c_str(), "r");
  if (!bio) throw ConfigError("cannot open CA file " + ca_path);
  StorePtr store(X509_STORE_new());
  int added = 0;
  while (X509* cert = PEM_read_bio_X509(bio, nullptr, nullptr, nullptr)) {
    X509_STORE_add_cert(store.get(), cert);
    X509_free(cert);
    ++added;
  }
  BIO_free(bio);
  if (added == 0) throw ConfigError("no certificates in " + ca_path);
  return store;
}

bool peer_verified(SSL* ssl, X509_STORE* store) {
  if (!ssl || !store) return false;
  X509* peer = SSL_get_peer_certificate(ssl);
  if (!peer) return false;
  STACK_OF(X509)* chain = SSL_get_peer_cert_chain(ssl);

  X509_STORE_CTX* ctx = X509_STORE_CTX_new();
  bool ok = false;
  if (ctx && X509_STORE_CTX_init(ctx, store, peer, chain) == 1)
    ok = X509_verify_cert(ctx) == 1;
  if (ctx) X509_STORE_CTX_free(ctx);
  X509_free(peer);
  return ok;
}

std::string peer_common_name(SSL* ssl) {
  if (!ssl) return {};
  X509* peer = SSL_get_peer_certificate(ssl);
  if (!peer) return {};
  char buf[256] = {0};
  X509_NAME_get_text_by_NID(X509_get_subject_name(peer), NID_commonName, buf,
                            sizeof(buf) - 1);
  X509_free(peer);
  return buf;
}

std::unique_ptr<httplib::SSLClient> make_client(const HostPort& target,
                                                const config::TlsPaths& tls,
                                                int connect_timeout_ms, int io_timeout_ms) {
  auto client =
      std::make_unique<httplib::SSLClient>(target.host, target.port, tls.cert, tls.key);
  client->set_ca_cert_path(tls.ca);
  client->enable_server_certificate_verification(true);
  client->set_connection_timeout(std::chrono::milliseconds(connect_timeout_ms));
  client->set_read_timeout(std::chrono::milliseconds(io_timeout_ms));
  client->set_write_timeout(std::chrono::milliseconds(io_timeout_ms));
  return client;
}

bool is_transport_header(const std::string& name) {
  static const char* kTransport[] = {
      "Host",       "Content-Length", "Connection",  "Transfer-Encoding",
      "Keep-Alive", "REMOTE_ADDR",    "REMOTE_PORT", "LOCAL_ADDR",
      "LOCAL_PORT", "Accept-Encoding"};
  for (const char* t : kTransport) {
    if (ci_equal(name, t)) return true;
  }
  return false;
}

Headers forwardable_headers(const httplib::Headers& headers) {
  Headers out;
  for (const auto& [name, value] : headers) {
    if (is_transport_header(name)) continue;
    out.emplace(name, value);
  }
  return out;
}

}  // namespace ztsfc::tls
