#include "ztsfc/harness.hpp"

#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/prctl.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "ztsfc/errors.hpp"
#include "ztsfc/inventory.hpp"
#include "ztsfc/security_functions.hpp"
#include "ztsfc/tls.hpp"
#include "ztsfc/totp.hpp"

extern char** environ;

namespace ztsfc::harness {
namespace {

namespace fs = std::filesystem;

constexpr const char* kManagedDevice = "laptop-007";

std::string self_directory() {
  char buf[4096];
  ssize_t n = ::readlink("/proc/self/exe", buf, sizeof buf - 1);
  if (n <= 0) throw StartupError("cannot locate the running executable");
  buf[n] = '\0';
  return fs::path(buf).parent_path().string();
}

std::string tail_of(const std::string& path, std::size_t max_bytes = 800) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (all.size() > max_bytes) all.erase(0, all.size() - max_bytes);
  return all;
}

HostPort resolve_listen(const std::string& listen, const std::string& what) {
  auto addr = parse_listen_address(listen);
  if (!addr) throw StartupError(what + ": listen address '" + listen + "' is not host:port");
  if (addr->port == 0) addr->port = pick_free_port();
  return *addr;
}

std::string pki_file(const std::string& dir, const std::string& name) {
  auto path = dir + "/" + name;
  if (!fs::exists(path))
    throw StartupError("missing " + path + "; generate the deployment PKI first");
  return path;
}

}  // namespace

std::string find_binary(const std::string& name) {
  std::string dir;
  if (const char* env = ::getenv("ZTSFC_BIN_DIR"); env && *env) dir = env;
  else dir = self_directory();
  auto path = dir + "/" + name;
  if (::access(path.c_str(), X_OK) != 0)
    throw StartupError("cannot find tool binary " + path);
  return path;
}

std::uint16_t pick_free_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw StartupError("socket: " + std::string(std::strerror(errno)));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof addr;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    ::close(fd);
    throw StartupError("cannot reserve a loopback port: " +
                       std::string(std::strerror(errno)));
  }
  auto port = ntohs(addr.sin_port);
  ::close(fd);
  return port;
}

ProcessResult run_process(const std::vector<std::string>& argv, int timeout_ms) {
  auto out_path = (fs::temp_directory_path() /
                   ("ztsfc-proc-" + crypto::hex_encode(crypto::random_bytes(6)) + ".log"))
                      .string();
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_path.c_str(),
                                   O_CREAT | O_WRONLY | O_APPEND, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);

  ProcessResult result;
  pid_t pid = -1;
  int rc = posix_spawn(&pid, argv[0].c_str(), &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    result.output = std::string("cannot start: ") + std::strerror(rc);
    return result;
  }

  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  int status = 0;
  for (;;) {
    pid_t got = ::waitpid(pid, &status, WNOHANG);
    if (got == pid) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);
  result.output = tail_of(out_path, 4000);
  std::error_code ec;
  fs::remove(out_path, ec);
  return result;
}

Topology Topology::boot(const config::TopologyConfig& topo) {
  // A peer tearing down mid-write must surface as an error, not kill us.
  std::signal(SIGPIPE, SIG_IGN);

  Topology t;
  t.pki_dir_ = fs::absolute(topo.pki_dir).lexically_normal().string();
  pki_file(t.pki_dir_, "enterprise-ca.crt.pem");

  auto policy = config::load_policy_file(topo.policy_path);

  t.pep_data_ = resolve_listen(topo.pep_listen, "pep");
  t.pep_mgmt_ = resolve_listen(topo.pep_mgmt_listen, "pep mgmt");
  t.service_ = resolve_listen(topo.service_listen, "service");
  for (const auto& fn : topo.functions)
    t.nodes_[fn.id] = resolve_listen(fn.listen, "function " + fn.id);

  for (const auto& [fn, _] : policy.function_registry)
    if (!t.nodes_.count(fn))
      throw StartupError("policy routes to function '" + fn +
                         "' but the topology does not start it");

  {
    std::set<std::string> distinct;
    distinct.insert(t.pep_data_.text());
    distinct.insert(t.pep_mgmt_.text());
    distinct.insert(t.service_.text());
    for (const auto& [_, addr] : t.nodes_) distinct.insert(addr.text());
    if (distinct.size() != 3 + t.nodes_.size())
      throw StartupError("component addresses are not distinct");
  }

  auto stamp = crypto::hex_encode(crypto::random_bytes(4));
  t.run_dir_ = (fs::temp_directory_path() /
                ("ztsfc-run-" + std::to_string(::getpid()) + "-" + stamp))
                   .string();
  fs::create_directories(t.run_dir_);

  // Client-side material the scenarios will present.
  auto inventory = DeviceInventory::load_file(t.pki_dir_ + "/inventory.csv");
  const auto* device = inventory.find(kManagedDevice);
  if (!device || !device->managed)
    throw StartupError("inventory in " + t.pki_dir_ + " lacks managed device " +
                       std::string(kManagedDevice));
  t.client_device_id_ = kManagedDevice;
  t.client_device_secret_ = device->secret;

  if (!topo.users_path.empty()) {
    auto users = sf::MfaUserStore::load_file(topo.users_path);
    auto names = users.users();
    if (!names.empty()) {
      t.mfa_user_ = names.front();
      t.mfa_secret_ = *users.find(t.mfa_user_);
    }
  }

  // Concrete per-run policy: same rules, real addresses, sealing keys.
  std::map<FunctionId, std::string> cert_paths;
  for (auto& [fn, address] : policy.function_registry) {
    address = t.nodes_.at(fn).text();
    cert_paths[fn] = pki_file(t.pki_dir_, fn + ".crt.pem");
  }
  {
    std::ofstream out(t.run_dir_ + "/policy.toml");
    out << config::render_policy(policy, cert_paths);
  }

  {
    std::ofstream out(t.run_dir_ + "/pep.toml");
    out << "[pep]\n"
        << "listen = \"" << t.pep_data_.text() << "\"\n"
        << "mgmt_listen = \"" << t.pep_mgmt_.text() << "\"\n"
        << "service = \"" << t.service_.text() << "\"\n"
        << "policy = \"policy.toml\"\n"
        << "inventory = \"" << t.pki_dir_ << "/inventory.csv\"\n"
        << "seal = " << (topo.seal ? "true" : "false") << "\n"
        << "pot = " << (topo.pot ? "true" : "false") << "\n"
        << "history = \"history.ndjson\"\n"
        << "feedback_log = \"feedback.ndjson\"\n\n"
        << "[pep.tls]\n"
        << "ca = \"" << pki_file(t.pki_dir_, "enterprise-ca.crt.pem") << "\"\n"
        << "client_ca = \"" << pki_file(t.pki_dir_, "client-ca.crt.pem") << "\"\n"
        << "cert = \"" << pki_file(t.pki_dir_, "pep.crt.pem") << "\"\n"
        << "key = \"" << pki_file(t.pki_dir_, "pep.key.pem") << "\"\n";
  }

  auto enterprise_ca = pki_file(t.pki_dir_, "enterprise-ca.crt.pem");
  auto pep_cert = pki_file(t.pki_dir_, "pep.crt.pem");

  t.spawn("service", {find_binary("ztsfc-service"), "--listen", t.service_.text(),
                      "--ca", enterprise_ca,
                      "--cert", pki_file(t.pki_dir_, "service.crt.pem"),
                      "--key", pki_file(t.pki_dir_, "service.key.pem")});

  for (const auto& fn : topo.functions) {
    std::vector<std::string> argv = {
        find_binary("ztsfc-node"),
        "--function", fn.id,
        "--kind", fn.kind,
        "--listen", t.nodes_.at(fn.id).text(),
        "--pep-mgmt", t.pep_mgmt_.text(),
        "--pep-cert", pep_cert,
        "--ca", enterprise_ca,
        "--cert", pki_file(t.pki_dir_, fn.id + ".crt.pem"),
        "--key", pki_file(t.pki_dir_, fn.id + ".key.pem"),
        "--delay-ms", std::to_string(fn.delay_ms),
    };
    if (fn.kind == "ips") {
      if (topo.rules_path.empty())
        throw StartupError("topology starts an ips function but names no rules file");
      argv.insert(argv.end(), {"--rules", topo.rules_path});
    }
    if (fn.kind == "mfa") {
      if (topo.users_path.empty())
        throw StartupError("topology starts an mfa function but names no users file");
      argv.insert(argv.end(), {"--users", topo.users_path});
    }
    if (topo.probe_sealed) argv.push_back("--probe-sealed");
    t.spawn(fn.id, argv);
  }

  t.spawn("pep", {find_binary("ztsfc-pep"), "--config", t.run_dir_ + "/pep.toml"});

  t.await_health("service", t.service_);
  for (const auto& [fn, addr] : t.nodes_) t.await_health(fn, addr);
  t.await_health("pep", t.pep_mgmt_);
  return t;
}

Topology::Topology(Topology&& other) noexcept
    : run_dir_(std::move(other.run_dir_)),
      pki_dir_(std::move(other.pki_dir_)),
      pep_data_(other.pep_data_),
      pep_mgmt_(other.pep_mgmt_),
      service_(other.service_),
      nodes_(std::move(other.nodes_)),
      children_(std::move(other.children_)),
      client_device_id_(std::move(other.client_device_id_)),
      client_device_secret_(std::move(other.client_device_secret_)),
      mfa_user_(std::move(other.mfa_user_)),
      mfa_secret_(std::move(other.mfa_secret_)) {
  other.children_.clear();
  other.run_dir_.clear();
}

Topology::~Topology() { teardown(); }

void Topology::spawn(const std::string& name, const std::vector<std::string>& argv) {
  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  auto out_log = run_dir_ + "/" + name + ".out.log";
  auto err_log = run_dir_ + "/" + name + ".err.log";

  pid_t parent = ::getpid();
  pid_t pid = ::fork();
  if (pid < 0) throw StartupError("cannot start " + name + ": " + std::strerror(errno));
  if (pid == 0) {
    // Children must not outlive a crashed launcher.
    ::prctl(PR_SET_PDEATHSIG, SIGKILL);
    if (::getppid() != parent) ::_exit(127);
    int out = ::open(out_log.c_str(), O_CREAT | O_WRONLY | O_APPEND, 0644);
    int err = ::open(err_log.c_str(), O_CREAT | O_WRONLY | O_APPEND, 0644);
    if (out >= 0) ::dup2(out, STDOUT_FILENO);
    if (err >= 0) ::dup2(err, STDERR_FILENO);
    ::execv(argv[0].c_str(), args.data());
    ::_exit(127);
  }
  children_.push_back({pid, name, err_log});
}

void Topology::await_health(const std::string& name, const HostPort& address) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(15);
  auto tls_paths = harness_tls();
  while (std::chrono::steady_clock::now() < deadline) {
    for (const auto& child : children_) {
      int status = 0;
      if (::waitpid(child.pid, &status, WNOHANG) == child.pid) {
        auto detail = tail_of(child.err_log);
        teardown();
        throw StartupError(child.name + " exited during startup" +
                           (detail.empty() ? "" : ":\n" + detail));
      }
    }
    auto client = tls::make_client(address, tls_paths, 500, 1000);
    if (auto res = client->Get("/sfc/health"); res && res->status == 200) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  teardown();
  throw StartupError(name + " never became healthy on " + address.text());
}

void Topology::teardown() {
  for (auto& child : children_) {
    if (child.pid <= 0) continue;
    ::kill(child.pid, SIGTERM);
  }
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(3);
  for (auto& child : children_) {
    if (child.pid <= 0) continue;
    for (;;) {
      int status = 0;
      pid_t got = ::waitpid(child.pid, &status, WNOHANG);
      if (got == child.pid || (got < 0 && errno == ECHILD)) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(child.pid, SIGKILL);
        ::waitpid(child.pid, &status, 0);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    child.pid = -1;
  }
  children_.clear();
  if (!run_dir_.empty() && !::getenv("ZTSFC_KEEP_RUN")) {
    std::error_code ec;
    fs::remove_all(run_dir_, ec);
  }
  run_dir_.clear();
}

HostPort Topology::node_address(const FunctionId& fn) const {
  auto it = nodes_.find(fn);
  if (it == nodes_.end()) throw Error("no such function: " + fn);
  return it->second;
}

std::vector<FunctionId> Topology::functions() const {
  std::vector<FunctionId> out;
  for (const auto& [fn, _] : nodes_) out.push_back(fn);
  return out;
}

config::TlsPaths Topology::harness_tls() const {
  config::TlsPaths tls;
  tls.ca = pki_dir_ + "/enterprise-ca.crt.pem";
  tls.cert = pki_dir_ + "/harness.crt.pem";
  tls.key = pki_dir_ + "/harness.key.pem";
  return tls;
}

ClientMaterial Topology::client_full() const {
  auto c = client_cert_only();
  c.device_id = client_device_id_;
  c.device_secret = client_device_secret_;
  return c;
}

ClientMaterial Topology::client_cert_only() const {
  ClientMaterial c = client_anonymous();
  c.tls.cert = pki_dir_ + "/" + client_device_id_ + ".crt.pem";
  c.tls.key = pki_dir_ + "/" + client_device_id_ + ".key.pem";
  return c;
}

ClientMaterial Topology::client_managed_only() const {
  ClientMaterial c = client_anonymous();
  c.device_id = client_device_id_;
  c.device_secret = client_device_secret_;
  return c;
}

ClientMaterial Topology::client_anonymous() const {
  ClientMaterial c;
  c.tls.ca = pki_dir_ + "/enterprise-ca.crt.pem";
  return c;
}

ClientMaterial Topology::with_mfa(ClientMaterial c) const {
  c.mfa_user = mfa_user_;
  c.mfa_secret = mfa_secret_;
  return c;
}

raw::ClientIdentity Topology::intruder_identity() const {
  raw::ClientIdentity id;
  id.ca = pki_dir_ + "/enterprise-ca.crt.pem";
  id.cert = pki_dir_ + "/intruder.crt.pem";
  id.key = pki_dir_ + "/intruder.key.pem";
  return id;
}

nlohmann::json Topology::get_json(const HostPort& address, const std::string& path) const {
  auto client = tls::make_client(address, harness_tls(), 2000, 10000);
  auto res = client->Get(path);
  if (!res || res->status != 200)
    throw Error("GET " + address.text() + path + " failed" +
                (res ? " (status " + std::to_string(res->status) + ")" : ""));
  auto parsed = nlohmann::json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) throw Error("GET " + path + ": unparseable body");
  return parsed;
}

nlohmann::json Topology::node_stats(const FunctionId& fn) const {
  return get_json(node_address(fn), "/sfc/stats");
}

std::uint64_t Topology::node_invocations(const FunctionId& fn) const {
  return node_stats(fn).value("invocations", 0ULL);
}

std::uint64_t Topology::service_invocations() const {
  return get_json(service_, "/sfc/stats").value("invocations", 0ULL);
}

nlohmann::json Topology::pep_history() const { return get_json(pep_mgmt_, "/sfc/history"); }

nlohmann::json Topology::pep_feedback() const { return get_json(pep_mgmt_, "/sfc/feedback"); }

nlohmann::json Topology::pep_stats() const { return get_json(pep_mgmt_, "/sfc/stats"); }

std::optional<raw::HttpResponse> send_through_pep(const Topology& topo,
                                                  const ClientMaterial& client,
                                                  const RequestSpec& spec,
                                                  std::string* error) {
  raw::RawTlsClient conn(topo.pep_data().host, topo.pep_data().port, client.tls);
  if (!conn.connect()) {
    if (error) *error = conn.last_error();
    return std::nullopt;
  }

  auto headers = spec.headers;
  if (!client.device_id.empty()) {
    auto assertion = DeviceInventory::make_assertion(client.device_id, client.device_secret,
                                                     conn.channel_binding());
    headers.emplace_back(kDeviceAssertionHeader, assertion);
  }
  if (!client.mfa_user.empty()) {
    headers.emplace_back(sf::kMfaUserHeader, client.mfa_user);
    headers.emplace_back(sf::kMfaCodeHeader,
                         totp::code_at(client.mfa_secret, std::time(nullptr)));
  }

  auto res = conn.request(spec.method, spec.target, headers, spec.body);
  if (!res && error) *error = conn.last_error();
  return res;
}

}  // namespace ztsfc::harness
