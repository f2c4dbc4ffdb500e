#pragma once

#include <string>
#include <vector>

#include "ztsfc/crypto.hpp"

namespace ztsfc::pki {

struct Identity {
  crypto::PkeyPtr key;
  crypto::X509Ptr cert;
};

// Self-signed CA certificate (P-256, SHA-256, CA:TRUE).
Identity make_ca(const std::string& common_name, int days = 365);

// Leaf signed by `ca`, usable for both server and client authentication,
// with SANs DNS:localhost and IP:127.0.0.1.
Identity issue_leaf(const Identity& ca, const std::string& common_name, int days = 365);

std::string cert_pem(const Identity& id);
std::string key_pem(const Identity& id);
void write_pem(const Identity& id, const std::string& cert_path,
               const std::string& key_path);

// Lays down the complete trust material for one deployment:
//   enterprise CA  -> pep, ips, mfa, service, harness   (infrastructure mTLS)
//   client CA      -> laptop-007 (managed), byod-042 (unmanaged)
//   foreign CA     -> intruder                          (negative tests)
// plus inventory.csv with fresh per-device assertion secrets.
// Refuses to overwrite an existing directory unless `force`.
void generate_deployment(const std::string& dir, bool force);

}  // namespace ztsfc::pki
