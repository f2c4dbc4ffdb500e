#include "ztsfc/config.hpp"

#include <filesystem>
#include <sstream>

#include "ztsfc/errors.hpp"

namespace ztsfc::config {
namespace {

namespace fs = std::filesystem;

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

TlsPaths load_tls(const toml::Document& doc, const std::string& table,
                  const std::string& file) {
  TlsPaths tls;
  tls.ca = resolve_path(file, doc.get_string(table, "ca"));
  tls.cert = resolve_path(file, doc.get_string(table, "cert"));
  tls.key = resolve_path(file, doc.get_string(table, "key"));
  if (doc.has(table, "client_ca"))
    tls.client_ca = resolve_path(file, doc.get_string(table, "client_ca"));
  return tls;
}

}  // namespace

std::string resolve_path(const std::string& config_file, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(config_file).parent_path() / path).lexically_normal().string();
}

TrustPolicy load_policy(const toml::Document& doc) {
  TrustPolicy policy;
  policy.threshold = doc.get_int("policy", "threshold");
  policy.function_priority = doc.get_string_array("policy", "function_priority");

  for (const auto& attr : doc.keys("policy.attribute_weights"))
    policy.attribute_weights[attr] = doc.get_int("policy.attribute_weights", attr);
  for (const auto& attr : doc.keys("policy.compensation"))
    policy.compensation[attr] = doc.get_string("policy.compensation", attr);

  for (const auto& fn : doc.subtables("functions")) {
    std::string table = "functions." + fn;
    policy.function_registry[fn] = doc.get_string(table, "address");
    policy.function_uplift[fn] = doc.get_int(table, "uplift");
    if (!parse_host_port(policy.function_registry[fn]))
      throw ConfigError("policy: function '" + fn + "' address '" +
                        policy.function_registry[fn] + "' is not host:port");
  }

  policy.validate();
  return policy;
}

TrustPolicy load_policy_file(const std::string& path) {
  return load_policy(toml::Document::parse_file(path));
}

std::string render_policy(const TrustPolicy& policy,
                          const std::map<FunctionId, std::string>& cert_paths) {
  std::ostringstream out;
  out << "[policy]\n";
  out << "threshold = " << policy.threshold << "\n";
  out << "function_priority = [";
  for (std::size_t i = 0; i < policy.function_priority.size(); ++i) {
    if (i) out << ", ";
    out << quoted(policy.function_priority[i]);
  }
  out << "]\n\n[policy.attribute_weights]\n";
  for (const auto& [attr, w] : policy.attribute_weights)
    out << attr << " = " << w << "\n";
  out << "\n[policy.compensation]\n";
  for (const auto& [attr, fn] : policy.compensation)
    out << attr << " = " << quoted(fn) << "\n";
  for (const auto& [fn, address] : policy.function_registry) {
    out << "\n[functions." << fn << "]\n";
    out << "address = " << quoted(address) << "\n";
    out << "uplift = " << policy.function_uplift.at(fn) << "\n";
    if (auto it = cert_paths.find(fn); it != cert_paths.end())
      out << "cert = " << quoted(it->second) << "\n";
  }
  return out.str();
}

std::map<FunctionId, std::string> policy_function_certs(const toml::Document& doc,
                                                        const std::string& config_file) {
  std::map<FunctionId, std::string> certs;
  for (const auto& fn : doc.subtables("functions")) {
    std::string table = "functions." + fn;
    if (doc.has(table, "cert"))
      certs[fn] = resolve_path(config_file, doc.get_string(table, "cert"));
  }
  return certs;
}

PepConfig load_pep_config_file(const std::string& path) {
  auto doc = toml::Document::parse_file(path);
  PepConfig cfg;
  cfg.listen = doc.get_string_or("pep", "listen", cfg.listen);
  cfg.mgmt_listen = doc.get_string_or("pep", "mgmt_listen", cfg.mgmt_listen);
  cfg.service = doc.get_string("pep", "service");
  cfg.policy_path = resolve_path(path, doc.get_string("pep", "policy"));
  cfg.inventory_path = resolve_path(path, doc.get_string("pep", "inventory"));
  cfg.seal = doc.get_bool_or("pep", "seal", cfg.seal);
  cfg.pot = doc.get_bool_or("pep", "pot", cfg.pot);
  cfg.history_path = resolve_path(path, doc.get_string_or("pep", "history", ""));
  cfg.feedback_path = resolve_path(path, doc.get_string_or("pep", "feedback_log", ""));
  cfg.connect_timeout_ms =
      static_cast<int>(doc.get_int_or("pep", "connect_timeout_ms", cfg.connect_timeout_ms));
  cfg.request_budget_ms =
      static_cast<int>(doc.get_int_or("pep", "request_budget_ms", cfg.request_budget_ms));
  cfg.tls = load_tls(doc, "pep.tls", path);
  if (cfg.tls.client_ca.empty())
    throw ConfigError(path + ": [pep.tls] needs client_ca to admit end clients");
  if (!parse_listen_address(cfg.listen) || !parse_listen_address(cfg.mgmt_listen))
    throw ConfigError(path + ": listen addresses must be host:port");
  if (!parse_host_port(cfg.service))
    throw ConfigError(path + ": pep.service must be host:port");
  if (cfg.connect_timeout_ms <= 0 || cfg.request_budget_ms <= 0)
    throw ConfigError(path + ": timeouts must be positive");
  return cfg;
}

NodeConfig load_node_config_file(const std::string& path) {
  auto doc = toml::Document::parse_file(path);
  NodeConfig cfg;
  cfg.function = doc.get_string("node", "function");
  cfg.kind = doc.get_string_or("node", "kind", cfg.function);
  cfg.listen = doc.get_string_or("node", "listen", cfg.listen);
  cfg.pep_mgmt = doc.get_string_or("node", "pep_mgmt", "");
  cfg.delay_ms = static_cast<int>(doc.get_int_or("node", "delay_ms", 0));
  cfg.probe_sealed = doc.get_bool_or("node", "probe_sealed", false);
  if (doc.has("node.ips", "rules"))
    cfg.rules_path = resolve_path(path, doc.get_string("node.ips", "rules"));
  if (doc.has("node.mfa", "users"))
    cfg.users_path = resolve_path(path, doc.get_string("node.mfa", "users"));
  cfg.tls = load_tls(doc, "node.tls", path);
  if (cfg.function.empty()) throw ConfigError(path + ": node.function must be set");
  if (cfg.delay_ms < 0) throw ConfigError(path + ": node.delay_ms must be >= 0");
  if (!parse_listen_address(cfg.listen))
    throw ConfigError(path + ": node.listen must be host:port");
  return cfg;
}

TopologyConfig load_topology_file(const std::string& path) {
  auto doc = toml::Document::parse_file(path);
  TopologyConfig cfg;
  cfg.pki_dir = resolve_path(path, doc.get_string_or("topology", "pki", cfg.pki_dir));
  cfg.policy_path = resolve_path(path, doc.get_string("topology", "policy"));
  cfg.rules_path = resolve_path(path, doc.get_string_or("topology", "rules", ""));
  cfg.users_path = resolve_path(path, doc.get_string_or("topology", "mfa_users", ""));
  cfg.seal = doc.get_bool_or("topology", "seal", cfg.seal);
  cfg.pot = doc.get_bool_or("topology", "pot", cfg.pot);
  cfg.probe_sealed = doc.get_bool_or("topology", "probe_sealed", cfg.probe_sealed);
  cfg.pep_listen = doc.get_string_or("topology.pep", "listen", cfg.pep_listen);
  cfg.pep_mgmt_listen =
      doc.get_string_or("topology.pep", "mgmt_listen", cfg.pep_mgmt_listen);
  cfg.service_listen =
      doc.get_string_or("topology.service", "listen", cfg.service_listen);
  for (const auto& fn : doc.subtables("topology.functions")) {
    std::string table = "topology.functions." + fn;
    TopologyFunction f;
    f.id = fn;
    f.kind = doc.get_string_or(table, "kind", fn);
    f.listen = doc.get_string_or(table, "listen", f.listen);
    f.delay_ms = static_cast<int>(doc.get_int_or(table, "delay_ms", 0));
    cfg.functions.push_back(std::move(f));
  }
  if (cfg.functions.empty())
    throw ConfigError(path + ": topology declares no functions");
  return cfg;
}

}  // namespace ztsfc::config
