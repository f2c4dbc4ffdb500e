#pragma once

#include <map>
#include <string>
#include <vector>

#include "ztsfc/toml.hpp"
#include "ztsfc/trust.hpp"

namespace ztsfc::config {

// Relative paths inside a config file resolve against that file's directory.
std::string resolve_path(const std::string& config_file, const std::string& path);

// --- trust policy ----------------------------------------------------------------

TrustPolicy load_policy(const toml::Document& doc);
TrustPolicy load_policy_file(const std::string& path);

// Serialization used by the harness to emit concrete per-run policies.
// load_policy(parse(render_policy(p))) == p.
std::string render_policy(const TrustPolicy& policy,
                          const std::map<FunctionId, std::string>& cert_paths = {});

// Function certificate paths, when the policy file carries them (needed by a
// sealing PEP to address each entry).
std::map<FunctionId, std::string> policy_function_certs(const toml::Document& doc,
                                                        const std::string& config_file);

// --- processes --------------------------------------------------------------------

struct TlsPaths {
  std::string ca;         // peer trust anchor
  std::string client_ca;  // issuer of end-client identities (entry point only)
  std::string cert;
  std::string key;
};

struct PepConfig {
  std::string listen = "127.0.0.1:8443";
  std::string mgmt_listen = "127.0.0.1:8444";
  std::string service;  // protected service host:port (chain terminal)
  std::string policy_path;
  std::string inventory_path;
  bool seal = false;
  bool pot = true;
  std::string history_path;   // empty = keep no file
  std::string feedback_path;  // empty = keep no file
  int connect_timeout_ms = 10000;  // per-hop connect
  int request_budget_ms = 30000;   // total upstream exchange
  TlsPaths tls;
};

PepConfig load_pep_config_file(const std::string& path);

struct NodeConfig {
  FunctionId function;  // identity announced in attestations and feedback
  std::string kind;     // plugin: ips | mfa | pass (defaults to `function`)
  std::string listen = "127.0.0.1:9001";
  std::string pep_mgmt;  // where drop feedback goes
  int delay_ms = 0;
  bool probe_sealed = false;  // diagnostic: report whether foreign entries leak
  std::string rules_path;     // ips
  std::string users_path;     // mfa
  TlsPaths tls;
};

NodeConfig load_node_config_file(const std::string& path);

// --- harness topology ---------------------------------------------------------------

struct TopologyFunction {
  FunctionId id;
  std::string kind;
  std::string listen = "127.0.0.1:0";  // port 0: harness picks a free port
  int delay_ms = 0;
};

struct TopologyConfig {
  std::string pki_dir = "pki";
  std::string policy_path;
  std::string rules_path;
  std::string users_path;
  bool seal = false;
  bool pot = true;
  bool probe_sealed = false;  // nodes report whether foreign entries leak
  std::string pep_listen = "127.0.0.1:0";
  std::string pep_mgmt_listen = "127.0.0.1:0";
  std::string service_listen = "127.0.0.1:0";
  std::vector<TopologyFunction> functions;
};

TopologyConfig load_topology_file(const std::string& path);

}  // namespace ztsfc::config
