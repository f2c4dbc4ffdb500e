#include "ztsfc/pki.hpp"

#include <openssl/pem.h>
#include <openssl/x509v3.h>

#include <filesystem>
#include <fstream>

#include "ztsfc/errors.hpp"
#include "ztsfc/inventory.hpp"

namespace ztsfc::pki {
namespace {

namespace fs = std::filesystem;

void add_name_entry(X509_NAME* name, const char* field, const std::string& value) {
  X509_NAME_add_entry_by_txt(name, field, MBSTRING_ASC,
                             reinterpret_cast<const unsigned char*>(value.c_str()), -1,
                             -1, 0);
}

void add_extension(X509* cert, X509* issuer, int nid, const char* value) {
  X509V3_CTX ctx;
  X509V3_set_ctx_nodb(&ctx);
  X509V3_set_ctx(&ctx, issuer, cert, nullptr, nullptr, 0);
  X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &ctx, nid, value);
  if (!ext) throw CryptoError(std::string("cannot create extension ") + value);
  X509_add_ext(cert, ext, -1);
  X509_EXTENSION_free(ext);
}

crypto::X509Ptr make_cert(EVP_PKEY* subject_key, const std::string& cn,
                          X509* issuer_cert, EVP_PKEY* issuer_key, bool is_ca,
                          int days) {
  crypto::X509Ptr cert(X509_new());
  if (!cert) throw CryptoError("X509_new failed");
  X509_set_version(cert.get(), 2);

  auto serial = crypto::random_bytes(8);
  serial[0] &= 0x7f;  // keep the serial positive
  BIGNUM* bn = BN_bin2bn(serial.data(), static_cast<int>(serial.size()), nullptr);
  BN_to_ASN1_INTEGER(bn, X509_get_serialNumber(cert.get()));
  BN_free(bn);

  X509_gmtime_adj(X509_getm_notBefore(cert.get()), -3600);
  X509_gmtime_adj(X509_getm_notAfter(cert.get()), 60L * 60 * 24 * days);

  X509_NAME* subject = X509_get_subject_name(cert.get());
  add_name_entry(subject, "O", "ztsfc");
  add_name_entry(subject, "CN", cn);
  X509* issuer = issuer_cert ? issuer_cert : cert.get();
  X509_set_issuer_name(cert.get(), X509_get_subject_name(issuer));
  X509_set_pubkey(cert.get(), subject_key);

  if (is_ca) {
    add_extension(cert.get(), issuer, NID_basic_constraints, "critical,CA:TRUE,pathlen:0");
    add_extension(cert.get(), issuer, NID_key_usage, "critical,keyCertSign,cRLSign");
  } else {
    add_extension(cert.get(), issuer, NID_basic_constraints, "critical,CA:FALSE");
    add_extension(cert.get(), issuer, NID_key_usage,
                  "critical,digitalSignature,keyEncipherment,keyAgreement");
    add_extension(cert.get(), issuer, NID_ext_key_usage, "serverAuth,clientAuth");
    add_extension(cert.get(), issuer, NID_subject_alt_name,
                  "DNS:localhost,IP:127.0.0.1");
  }
  add_extension(cert.get(), issuer, NID_subject_key_identifier, "hash");
  if (issuer_cert)
    add_extension(cert.get(), issuer, NID_authority_key_identifier, "keyid:always");

  if (X509_sign(cert.get(), issuer_key, EVP_sha256()) == 0)
    throw CryptoError("X509_sign failed for " + cn);
  return cert;
}

std::string pem_of_cert(X509* cert) {
  BIO* bio = BIO_new(BIO_s_mem());
  PEM_write_bio_X509(bio, cert);
  char* data = nullptr;
  long len = BIO_get_mem_data(bio, &data);
  std::string out(data, static_cast<std::size_t>(len));
  BIO_free(bio);
  return out;
}

std::string pem_of_key(EVP_PKEY* key) {
  BIO* bio = BIO_new(BIO_s_mem());
  PEM_write_bio_PrivateKey(bio, key, nullptr, nullptr, 0, nullptr, nullptr);
  char* data = nullptr;
  long len = BIO_get_mem_data(bio, &data);
  std::string out(data, static_cast<std::size_t>(len));
  BIO_free(bio);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

Identity make_ca(const std::string& common_name, int days) {
  Identity id;
  id.key = crypto::generate_p256_key();
  id.cert = make_cert(id.key.get(), common_name, nullptr, id.key.get(), true, days);
  return id;
}

Identity issue_leaf(const Identity& ca, const std::string& common_name, int days) {
  Identity id;
  id.key = crypto::generate_p256_key();
  id.cert =
      make_cert(id.key.get(), common_name, ca.cert.get(), ca.key.get(), false, days);
  return id;
}

std::string cert_pem(const Identity& id) { return pem_of_cert(id.cert.get()); }
std::string key_pem(const Identity& id) { return pem_of_key(id.key.get()); }

void write_pem(const Identity& id, const std::string& cert_path,
               const std::string& key_path) {
  write_text(cert_path, cert_pem(id));
  write_text(key_path, key_pem(id));
  fs::permissions(key_path, fs::perms::owner_read | fs::perms::owner_write,
                  fs::perm_options::replace);
}

void generate_deployment(const std::string& dir, bool force) {
  fs::path root(dir);
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!force)
      throw ConfigError(dir + " already exists; pass --force to regenerate");
    fs::remove_all(root);
  }
  fs::create_directories(root);

  auto emit = [&](const Identity& id, const std::string& name) {
    write_pem(id, (root / (name + ".crt.pem")).string(),
              (root / (name + ".key.pem")).string());
  };

  auto enterprise = make_ca("ztsfc enterprise CA");
  emit(enterprise, "enterprise-ca");
  for (const char* name : {"pep", "ips", "mfa", "service", "harness"})
    emit(issue_leaf(enterprise, name), name);

  auto client_ca = make_ca("ztsfc client CA");
  emit(client_ca, "client-ca");
  emit(issue_leaf(client_ca, "laptop-007"), "laptop-007");
  emit(issue_leaf(client_ca, "byod-042"), "byod-042");

  auto foreign = make_ca("somebody else entirely");
  emit(foreign, "foreign-ca");
  emit(issue_leaf(foreign, "intruder"), "intruder");

  // Device inventory with fresh assertion secrets; laptop-007 is the only
  // managed device.
  std::string inventory = "# device_id, secret_hex, managed\n";
  for (const auto& [device, managed] :
       std::vector<std::pair<std::string, bool>>{{"laptop-007", true}, {"byod-042", false}}) {
    inventory += device + ", " + crypto::hex_encode(crypto::random_bytes(32)) + ", " +
                 (managed ? "true" : "false") + "\n";
  }
  write_text(root / "inventory.csv", inventory);
}

}  // namespace ztsfc::pki
