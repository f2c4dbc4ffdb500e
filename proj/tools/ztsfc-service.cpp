#include <csignal>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ztsfc/echo_service.hpp"
#include "ztsfc/errors.hpp"
#include "ztsfc/http_common.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);  // dropped peers surface as write errors

  CLI::App app{"protected service: reflects requests back as JSON over mutual TLS"};
  std::string listen = "127.0.0.1:0";
  ztsfc::config::TlsPaths tls;
  app.add_option("--listen", listen, "host:port, port 0 picks a free one")
      ->capture_default_str();
  app.add_option("--ca", tls.ca, "trust anchor for peers")->required();
  app.add_option("--cert", tls.cert, "server certificate")->required();
  app.add_option("--key", tls.key, "server private key")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    auto addr = ztsfc::parse_listen_address(listen);
    if (!addr) {
      std::fprintf(stderr, "unusable --listen '%s'\n", listen.c_str());
      return 2;
    }
    ztsfc::EchoService service(tls);
    int port = service.bind(*addr);
    if (port < 0) {
      std::fprintf(stderr, "cannot bind %s\n", listen.c_str());
      return 2;
    }
    std::printf("service listening on %s:%d\n", addr->host.c_str(), port);
    std::fflush(stdout);
    return service.serve() ? 0 : 2;
  } catch (const ztsfc::Error& e) {
    std::fprintf(stderr, "service startup failed: %s\n", e.what());
    return 2;
  }
}
