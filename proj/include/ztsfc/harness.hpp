#pragma once

#include <sys/types.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ztsfc/config.hpp"
#include "ztsfc/crypto.hpp"
#include "ztsfc/http_common.hpp"
#include "ztsfc/raw_client.hpp"

namespace ztsfc::harness {

// Sibling tool binary: $ZTSFC_BIN_DIR/<name> when the override is set,
// otherwise next to the running executable. Throws StartupError when absent.
std::string find_binary(const std::string& name);

// Kernel-assigned free loopback port (bind to 0, read back, release).
std::uint16_t pick_free_port();

// Runs a command to completion (SIGKILL past the deadline) and captures its
// combined stdout+stderr.
struct ProcessResult {
  int exit_code = -1;
  std::string output;
};
ProcessResult run_process(const std::vector<std::string>& argv, int timeout_ms = 10000);

// Everything a client needs to present one trust posture.
struct ClientMaterial {
  raw::ClientIdentity tls;      // cert/key empty = anonymous connection
  std::string device_id;        // empty = no device assertion
  crypto::Bytes device_secret;  // MAC key for the assertion
  std::string mfa_user;         // credentials sent when non-empty
  crypto::Bytes mfa_secret;
};

struct RequestSpec {
  std::string method = "GET";
  std::string target = "/";
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
};

// One deployment: PEP, one process per function, echo service — separate
// processes wired by mutual TLS, concrete ports, per-run config and logs in a
// scratch directory. Teardown on destruction.
class Topology {
 public:
  static Topology boot(const config::TopologyConfig& topo);

  Topology(Topology&& other) noexcept;
  Topology& operator=(Topology&&) = delete;
  Topology(const Topology&) = delete;
  ~Topology();

  const HostPort& pep_data() const { return pep_data_; }
  const HostPort& pep_mgmt() const { return pep_mgmt_; }
  const HostPort& service() const { return service_; }
  HostPort node_address(const FunctionId& fn) const;
  std::vector<FunctionId> functions() const;

  const std::string& run_dir() const { return run_dir_; }
  const std::string& pki_dir() const { return pki_dir_; }
  std::string history_file() const { return run_dir_ + "/history.ndjson"; }
  std::string feedback_file() const { return run_dir_ + "/feedback.ndjson"; }

  // Enterprise-certified identity for management and stats queries.
  config::TlsPaths harness_tls() const;

  ClientMaterial client_full() const;          // certificate + managed device
  ClientMaterial client_cert_only() const;     // certificate, no assertion
  ClientMaterial client_managed_only() const;  // assertion, anonymous TLS
  ClientMaterial client_anonymous() const;     // neither
  raw::ClientIdentity intruder_identity() const;  // foreign-CA certificate

  // Same posture, plus one-time-code credentials for the configured user.
  ClientMaterial with_mfa(ClientMaterial c) const;
  const std::string& mfa_user() const { return mfa_user_; }
  const crypto::Bytes& mfa_secret() const { return mfa_secret_; }

  nlohmann::json node_stats(const FunctionId& fn) const;
  std::uint64_t node_invocations(const FunctionId& fn) const;
  std::uint64_t service_invocations() const;
  nlohmann::json pep_history() const;
  nlohmann::json pep_feedback() const;
  nlohmann::json pep_stats() const;

  void teardown();  // idempotent

 private:
  Topology() = default;

  struct Child {
    pid_t pid = -1;
    std::string name;
    std::string err_log;
  };

  void spawn(const std::string& name, const std::vector<std::string>& argv);
  void await_health(const std::string& name, const HostPort& address);
  nlohmann::json get_json(const HostPort& address, const std::string& path) const;

  std::string run_dir_;
  std::string pki_dir_;
  HostPort pep_data_;
  HostPort pep_mgmt_;
  HostPort service_;
  std::map<FunctionId, HostPort> nodes_;
  std::vector<Child> children_;
  std::string client_device_id_;  // managed device used for assertions
  crypto::Bytes client_device_secret_;
  std::string mfa_user_;
  crypto::Bytes mfa_secret_;
};

// One request through the PEP as `client`. Connects, derives the channel
// binding, attaches the device assertion and one-time code when the material
// calls for it, sends, and returns the response.
std::optional<raw::HttpResponse> send_through_pep(const Topology& topo,
                                                  const ClientMaterial& client,
                                                  const RequestSpec& spec,
                                                  std::string* error = nullptr);

}  // namespace ztsfc::harness
