#include <csignal>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ztsfc/config.hpp"
#include "ztsfc/errors.hpp"
#include "ztsfc/node_runtime.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);  // dropped peers surface as write errors

  CLI::App app{"service function host: one mutual-TLS chain hop"};

  std::string config_path;
  std::string pep_cert;
  std::optional<std::string> function, kind, listen, pep_mgmt, rules, users;
  std::optional<std::string> ca, cert, key;
  std::optional<int> delay_ms;
  bool probe_sealed = false;

  app.add_option("--config", config_path, "base config file; flags override it");
  app.add_option("--function", function, "function identity (must match the certificate)");
  app.add_option("--kind", kind, "plugin: ips | mfa | pass");
  app.add_option("--listen", listen, "host:port, port 0 picks a free one");
  app.add_option("--pep-mgmt", pep_mgmt, "entry-point management address for drop feedback");
  app.add_option("--pep-cert", pep_cert, "verifier certificate transit proofs are sealed to");
  app.add_option("--rules", rules, "signature ruleset (ips)");
  app.add_option("--users", users, "user/secret store (mfa)");
  app.add_option("--delay-ms", delay_ms, "artificial per-request processing delay");
  app.add_flag("--probe-sealed", probe_sealed,
               "report whether sealed entries for other functions leak");
  app.add_option("--ca", ca, "trust anchor for peers");
  app.add_option("--cert", cert, "node certificate");
  app.add_option("--key", key, "node private key");
  CLI11_PARSE(app, argc, argv);

  try {
    ztsfc::config::NodeConfig cfg;
    if (!config_path.empty()) cfg = ztsfc::config::load_node_config_file(config_path);
    if (function) cfg.function = *function;
    if (kind) cfg.kind = *kind;
    if (listen) cfg.listen = *listen;
    if (pep_mgmt) cfg.pep_mgmt = *pep_mgmt;
    if (rules) cfg.rules_path = *rules;
    if (users) cfg.users_path = *users;
    if (delay_ms) cfg.delay_ms = *delay_ms;
    if (probe_sealed) cfg.probe_sealed = true;
    if (ca) cfg.tls.ca = *ca;
    if (cert) cfg.tls.cert = *cert;
    if (key) cfg.tls.key = *key;
    if (cfg.function.empty()) {
      std::fprintf(stderr, "--function (or a config file) is required\n");
      return 2;
    }

    ztsfc::SfNode node(std::move(cfg), pep_cert);
    int port = node.bind();
    if (port < 0) {
      std::fprintf(stderr, "cannot bind %s\n", node.config().listen.c_str());
      return 2;
    }
    std::printf("%s listening on port %d\n", node.config().function.c_str(), port);
    std::fflush(stdout);
    return node.serve() ? 0 : 2;
  } catch (const ztsfc::Error& e) {
    std::fprintf(stderr, "node startup failed: %s\n", e.what());
    return 2;
  }
}
