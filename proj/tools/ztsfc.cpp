#include <csignal>
#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "ztsfc/config.hpp"
#include "ztsfc/errors.hpp"
#include "ztsfc/harness.hpp"
#include "ztsfc/pki.hpp"
#include "ztsfc/scenarios.hpp"

namespace {

using namespace ztsfc;

int cmd_pki_gen(const std::string& out_dir, bool force) {
  try {
    pki::generate_deployment(out_dir, force);
    std::printf("trust material written to %s\n", out_dir.c_str());
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "pki generation failed: %s\n", e.what());
    return 2;
  }
}

int cmd_up(const std::string& config_path) {
  try {
    auto topo = harness::Topology::boot(config::load_topology_file(config_path));

    std::printf("pep data        https://%s\n", topo.pep_data().text().c_str());
    std::printf("pep management  https://%s\n", topo.pep_mgmt().text().c_str());
    for (const auto& fn : topo.functions())
      std::printf("%-15s %s\n", fn.c_str(), topo.node_address(fn).text().c_str());
    std::printf("service         %s\n", topo.service().text().c_str());
    std::printf("run directory   %s\n", topo.run_dir().c_str());
    std::printf("running; stop with SIGINT or SIGTERM\n");
    std::fflush(stdout);

    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    int sig = 0;
    sigwait(&set, &sig);

    std::printf("stopping\n");
    topo.teardown();
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "deployment failed to start: %s\n", e.what());
    return 2;
  }
}

int cmd_scenarios(const std::string& config_path, const std::string& report_path) {
  scenarios::Report report;
  try {
    report = scenarios::run_suite(config::load_topology_file(config_path));
  } catch (const StartupError& e) {
    std::fprintf(stderr, "deployment failed to start: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "suite aborted: %s\n", e.what());
    return 1;
  }

  for (const auto& r : report.results)
    std::printf("%s %-28s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
  std::printf("%zu/%zu scenarios passed\n", report.passed(), report.results.size());

  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << report.to_json().dump(2) << "\n";
    if (!out) {
      std::fprintf(stderr, "cannot write report to %s\n", report_path.c_str());
      return 1;
    }
    std::printf("report written to %s\n", report_path.c_str());
  }
  return report.all_passed() ? 0 : 1;
}

int cmd_soak(const std::string& config_path, int concurrency) {
  try {
    auto topo = harness::Topology::boot(config::load_topology_file(config_path));
    auto result = scenarios::soak(topo, concurrency);
    std::printf("%s %s %s\n", result.pass ? "PASS" : "FAIL", result.name.c_str(),
                result.detail.c_str());
    return result.pass ? 0 : 1;
  } catch (const StartupError& e) {
    std::fprintf(stderr, "deployment failed to start: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "soak aborted: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chain-routing trust deployment harness"};
  app.require_subcommand(1);

  auto* pki_cmd = app.add_subcommand("pki", "trust material");
  pki_cmd->require_subcommand(1);
  auto* gen = pki_cmd->add_subcommand("gen", "generate CAs, identities, and inventory");
  std::string out_dir = "pki";
  bool force = false;
  gen->add_option("--out", out_dir, "target directory")->capture_default_str();
  gen->add_flag("--force", force, "replace an existing directory");

  auto* up = app.add_subcommand("up", "boot a deployment and run until signalled");
  std::string up_config;
  up->add_option("--config", up_config, "topology file")->required();

  auto* sc = app.add_subcommand("scenarios", "behavioral scenarios");
  sc->require_subcommand(1);
  auto* sc_run = sc->add_subcommand("run", "boot a deployment and run the full suite");
  std::string sc_config, report_path;
  sc_run->add_option("--config", sc_config, "topology file")->required();
  sc_run->add_option("--report", report_path, "write the JSON report here");

  auto* soak = app.add_subcommand("soak", "concurrent isolation check");
  std::string soak_config;
  int concurrency = 32;
  soak->add_option("--config", soak_config, "topology file")->required();
  soak->add_option("--concurrency", concurrency, "simultaneous requests")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) return cmd_pki_gen(out_dir, force);
  if (up->parsed()) return cmd_up(up_config);
  if (sc_run->parsed()) return cmd_scenarios(sc_config, report_path);
  if (soak->parsed()) return cmd_soak(soak_config, concurrency);
  return 1;
}
