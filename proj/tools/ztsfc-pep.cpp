#include <csignal>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ztsfc/config.hpp"
#include "ztsfc/errors.hpp"
#include "ztsfc/pep_runtime.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);  // dropped peers surface as write errors

  CLI::App app{"policy enforcement point: client-facing TLS entry with chain injection"};

  std::string config_path;
  std::optional<std::string> listen, mgmt_listen;
  std::optional<bool> seal, pot;

  app.add_option("--config", config_path, "entry-point config file")->required();
  app.add_option("--listen", listen, "override the data port");
  app.add_option("--mgmt-listen", mgmt_listen, "override the management port");
  app.add_option("--seal", seal, "override sealed chain encoding (true/false)");
  app.add_option("--pot", pot, "override transit proof verification (true/false)");
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = ztsfc::config::load_pep_config_file(config_path);
    if (listen) cfg.listen = *listen;
    if (mgmt_listen) cfg.mgmt_listen = *mgmt_listen;
    if (seal) cfg.seal = *seal;
    if (pot) cfg.pot = *pot;

    ztsfc::PepServer pep(std::move(cfg));
    int data_port = pep.bind();
    if (data_port < 0) {
      std::fprintf(stderr, "cannot bind data port\n");
      return 2;
    }
    int mgmt_port = pep.bind_mgmt();
    if (mgmt_port < 0) {
      std::fprintf(stderr, "cannot bind management port\n");
      return 2;
    }
    std::printf("pep data port %d, management port %d\n", data_port, mgmt_port);
    std::fflush(stdout);
    return pep.serve() ? 0 : 2;
  } catch (const ztsfc::Error& e) {
    std::fprintf(stderr, "pep startup failed: %s\n", e.what());
    return 2;
  }
}
