#include "ztsfc/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "ztsfc/chain_codec.hpp"
#include "ztsfc/echo_service.hpp"
#include "ztsfc/errors.hpp"
#include "ztsfc/security_functions.hpp"
#include "ztsfc/totp.hpp"

namespace ztsfc::scenarios {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using harness::ClientMaterial;
using harness::RequestSpec;
using harness::Topology;

using Counts = std::map<std::string, std::uint64_t>;

Counts snapshot(const Topology& topo) {
  Counts counts;
  for (const auto& fn : topo.functions()) counts[fn] = topo.node_invocations(fn);
  counts["service"] = topo.service_invocations();
  return counts;
}

Counts delta(const Counts& before, const Counts& after) {
  Counts d;
  for (const auto& [name, count] : after) {
    auto it = before.find(name);
    d[name] = count - (it == before.end() ? 0 : it->second);
  }
  return d;
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::optional<std::string> response_rid(const raw::HttpResponse& res) {
  return get_header(res.headers, chain::kRequestIdHeader);
}

nlohmann::json find_history(const Topology& topo, const std::string& rid) {
  for (const auto& rec : topo.pep_history())
    if (rec.value("request_id", "") == rid) return rec;
  return nlohmann::json();
}

std::vector<std::string> chain_of(const nlohmann::json& record) {
  std::vector<std::string> chain;
  if (record.contains("chain"))
    for (const auto& fn : record["chain"]) chain.push_back(fn.get<std::string>());
  return chain;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out = "[";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += parts[i];
  }
  return out + "]";
}

// One request + everything needed to judge it.
struct Probe {
  std::optional<raw::HttpResponse> response;
  std::string error;
  double latency_ms = 0;
  Counts invocations;
  std::string rid;
  nlohmann::json history;
};

Probe probe(Topology& topo, const ClientMaterial& client, const RequestSpec& spec) {
  Probe p;
  auto before = snapshot(topo);
  auto t0 = Clock::now();
  p.response = harness::send_through_pep(topo, client, spec, &p.error);
  p.latency_ms = ms_since(t0);
  p.invocations = delta(before, snapshot(topo));
  if (p.response) {
    if (auto rid = response_rid(*p.response)) {
      p.rid = *rid;
      p.history = find_history(topo, p.rid);
    }
  }
  return p;
}

// Shared assertion helper: accumulates failures into `problems`.
void expect(std::vector<std::string>& problems, bool ok, const std::string& what) {
  if (!ok) problems.push_back(what);
}

Result judge(Result r, const Probe& p, std::vector<std::string> problems) {
  if (p.response) r.status = p.response->status;
  r.latency_ms = p.latency_ms;
  r.invocations = p.invocations;
  r.path = chain_of(p.history);
  if (problems.empty()) {
    r.pass = true;
    if (r.detail.empty())
      r.detail = "status " + std::to_string(r.status) + ", path " + join(r.path);
  } else {
    std::string all;
    for (const auto& s : problems) all += (all.empty() ? "" : "; ") + s;
    r.detail = all;
  }
  return r;
}

// A code outside the verifier's acceptance window regardless of when the node
// clocks the request: avoid every step within +/-2 of now.
std::string wrong_code_for(const crypto::Bytes& secret) {
  auto now = static_cast<std::int64_t>(std::time(nullptr));
  std::set<std::string> live;
  for (int step = -2; step <= 2; ++step) live.insert(totp::code_at(secret, now + 30 * step));
  for (int candidate = 0; candidate < 1000000; ++candidate) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d", candidate);
    if (!live.count(buf)) return buf;
  }
  return "000000";  // unreachable: only five codes are ever live
}

config::TopologyConfig sealed_variant(const config::TopologyConfig& base) {
  auto cfg = base;
  cfg.seal = true;
  cfg.probe_sealed = true;
  cfg.pep_listen = "127.0.0.1:0";
  cfg.pep_mgmt_listen = "127.0.0.1:0";
  cfg.service_listen = "127.0.0.1:0";
  for (auto& fn : cfg.functions) fn.listen = "127.0.0.1:0";
  return cfg;
}

}  // namespace

nlohmann::json Result::to_json() const {
  return nlohmann::json{
      {"name", name},         {"pass", pass},
      {"detail", detail},     {"path", path},
      {"status", status},     {"latency_ms", latency_ms},
      {"invocations", invocations},
  };
}

Result Result::fail(std::string name, std::string why) {
  Result r;
  r.name = std::move(name);
  r.detail = std::move(why);
  return r;
}

std::size_t Report::passed() const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const Result& r) { return r.pass; }));
}

std::size_t Report::failed() const { return results.size() - passed(); }

nlohmann::json Report::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) arr.push_back(r.to_json());
  return nlohmann::json{{"passed", passed()}, {"failed", failed()}, {"scenarios", arr}};
}

Result routing(Topology& topo, const std::string& name, const ClientMaterial& client,
               const std::vector<FunctionId>& expected_path) {
  Result r;
  r.name = name;

  RequestSpec spec;
  spec.method = "POST";
  spec.target = "/api/" + name;
  spec.headers = {{"X-Scenario", name}};
  spec.body = "payload for " + name;

  auto p = probe(topo, client, spec);
  if (!p.response) return Result::fail(name, "no response: " + p.error);

  std::vector<std::string> problems;
  expect(problems, p.response->status == 200,
         "status " + std::to_string(p.response->status) + " != 200");
  expect(problems, !p.rid.empty(), "response carries no request id");
  expect(problems, !p.history.is_null(), "no history record for " + p.rid);
  expect(problems, p.history.value("outcome", "") == "Served",
         "outcome " + p.history.value("outcome", "?") + " != Served");
  expect(problems, chain_of(p.history) == expected_path,
         "path " + join(chain_of(p.history)) + " != expected " + join(expected_path));
  expect(problems, p.invocations["service"] == 1, "service invocations != 1");
  for (const auto& fn : topo.functions()) {
    std::uint64_t expected =
        std::count(expected_path.begin(), expected_path.end(), fn) ? 1 : 0;
    expect(problems, p.invocations[fn] == expected,
           fn + " invocations " + std::to_string(p.invocations[fn]) +
               " != " + std::to_string(expected));
  }
  return judge(std::move(r), p, std::move(problems));
}

Result ips_drop(Topology& topo) {
  Result r;
  r.name = "ips-drop";

  RequestSpec spec;
  spec.method = "POST";
  spec.target = "/api/orders";
  spec.body = "id=1 union select username, password from users --";

  auto p = probe(topo, topo.client_cert_only(), spec);
  if (!p.response) return Result::fail(r.name, "no response: " + p.error);

  std::vector<std::string> problems;
  expect(problems, p.response->status == 403,
         "status " + std::to_string(p.response->status) + " != 403");
  expect(problems, p.history.value("outcome", "") == "DroppedByFunction",
         "outcome " + p.history.value("outcome", "?") + " != DroppedByFunction");
  expect(problems, p.history.value("detail", "").find("rule:") != std::string::npos,
         "history detail lacks the matched rule: " + p.history.value("detail", ""));
  expect(problems, p.invocations["service"] == 0, "request leaked past the ips");

  bool feedback_found = false;
  for (const auto& event : topo.pep_feedback())
    if (event.value("request_id", "") == p.rid && event.value("function_id", "") == "ips")
      feedback_found = true;
  expect(problems, feedback_found, "no feedback event for " + p.rid);
  return judge(std::move(r), p, std::move(problems));
}

Result mfa_wrong_code(Topology& topo) {
  Result r;
  r.name = "mfa-wrong-code";

  auto client = topo.client_managed_only();
  RequestSpec spec;
  spec.method = "POST";
  spec.target = "/api/profile";
  spec.body = "settings";
  spec.headers = {{sf::kMfaUserHeader, topo.mfa_user()},
                  {sf::kMfaCodeHeader, wrong_code_for(topo.mfa_secret())}};

  auto p = probe(topo, client, spec);
  if (!p.response) return Result::fail(r.name, "no response: " + p.error);

  std::vector<std::string> problems;
  expect(problems, p.response->status == 403,
         "status " + std::to_string(p.response->status) + " != 403");
  expect(problems, p.history.value("outcome", "") == "DroppedByFunction",
         "outcome " + p.history.value("outcome", "?") + " != DroppedByFunction");
  expect(problems, p.history.value("detail", "").find("mfa-failed") != std::string::npos,
         "drop reason is not mfa-failed: " + p.history.value("detail", ""));
  expect(problems, p.invocations["service"] == 0, "request leaked past the mfa");

  bool feedback_found = false;
  for (const auto& event : topo.pep_feedback())
    if (event.value("request_id", "") == p.rid &&
        event.value("reason", "") == "mfa-failed")
      feedback_found = true;
  expect(problems, feedback_found, "no mfa-failed feedback event for " + p.rid);
  return judge(std::move(r), p, std::move(problems));
}

Result mfa_challenge(Topology& topo) {
  Result r;
  r.name = "mfa-challenge";

  RequestSpec spec;
  spec.method = "GET";
  spec.target = "/api/profile";

  auto p = probe(topo, topo.client_managed_only(), spec);
  if (!p.response) return Result::fail(r.name, "no response: " + p.error);

  std::vector<std::string> problems;
  expect(problems, p.response->status == 401,
         "status " + std::to_string(p.response->status) + " != 401");
  expect(problems, get_header(p.response->headers, "WWW-Authenticate").has_value(),
         "401 without WWW-Authenticate");
  expect(problems, p.history.value("outcome", "") == "Denied",
         "outcome " + p.history.value("outcome", "?") + " != Denied");
  expect(problems, p.invocations["service"] == 0, "challenge leaked to the service");
  expect(problems, p.invocations["mfa"] == 1, "mfa did not see the request");
  return judge(std::move(r), p, std::move(problems));
}

Result foreign_certificate(Topology& topo) {
  Result r;
  r.name = "foreign-certificate";

  // A certificate from somebody else's CA earns nothing: the connection is
  // admitted, the trust score stays at zero, the full chain challenges.
  ClientMaterial client;
  client.tls = topo.intruder_identity();

  RequestSpec spec;
  spec.method = "GET";
  spec.target = "/api/secret";

  auto p = probe(topo, client, spec);
  if (!p.response) return Result::fail(r.name, "no response: " + p.error);

  std::vector<std::string> problems;
  expect(problems, p.response->status == 401,
         "status " + std::to_string(p.response->status) + " != 401 (challenge)");
  expect(problems, p.invocations["service"] == 0, "intruder reached the service");
  expect(problems, p.history.value("score", -1) == 0,
         "foreign certificate scored trust points");
  auto attrs = p.history.value("attributes", nlohmann::json::array());
  expect(problems, attrs.empty(), "foreign certificate yielded attributes");
  return judge(std::move(r), p, std::move(problems));
}

std::vector<Result> pot_tamper(Topology& topo) {
  struct Mode {
    const char* how;
    const char* expected_reason;
  };
  const Mode modes[] = {
      {"drop-first", "absent"},
      {"flip-first", "changed"},
      {"dup-first", "duplicate"},
  };

  std::vector<Result> results;
  for (const auto& mode : modes) {
    Result r;
    r.name = std::string("pot-tamper-") + mode.how;

    RequestSpec spec;
    spec.method = "POST";
    spec.target = "/api/ledger";
    spec.body = "entry";
    spec.headers = {{kEchoTamperHeader, mode.how}};

    auto p = probe(topo, topo.client_cert_only(), spec);
    if (!p.response) {
      results.push_back(Result::fail(r.name, "no response: " + p.error));
      continue;
    }

    std::vector<std::string> problems;
    expect(problems, p.response->status == 502,
           "status " + std::to_string(p.response->status) + " != 502");
    expect(problems, p.history.value("outcome", "") == "PotFailure",
           "outcome " + p.history.value("outcome", "?") + " != PotFailure");
    expect(problems,
           p.history.value("detail", "").find(mode.expected_reason) != std::string::npos,
           std::string("detail lacks '") + mode.expected_reason +
               "': " + p.history.value("detail", ""));
    expect(problems, p.invocations["service"] == 1, "service was never reached");
    results.push_back(judge(std::move(r), p, std::move(problems)));
  }
  return results;
}

std::vector<Result> segmentation(Topology& topo) {
  std::vector<std::pair<std::string, HostPort>> targets;
  for (const auto& fn : topo.functions()) targets.emplace_back(fn, topo.node_address(fn));
  targets.emplace_back("service", topo.service());

  std::vector<Result> results;
  for (const auto& [name, address] : targets) {
    Result r;
    r.name = "segmentation-" + name;

    auto before = snapshot(topo);
    auto client_id = topo.client_cert_only();
    raw::RawTlsClient conn(address.host, address.port, client_id.tls);
    bool connected = conn.connect();
    std::optional<raw::HttpResponse> res;
    if (connected) res = conn.request("GET", "/", {}, "");
    auto d = delta(before, snapshot(topo));

    std::vector<std::string> problems;
    expect(problems, !res.has_value(), "interior component answered HTTP");
    expect(problems, conn.bytes_received() == 0,
           std::to_string(conn.bytes_received()) + " HTTP bytes crossed the segment");
    std::uint64_t touched = 0;
    for (const auto& [component, count] : d) touched += count;
    expect(problems, touched == 0, "a handler ran despite the failed handshake");

    r.status = 0;
    r.invocations = d;
    if (problems.empty()) {
      r.pass = true;
      r.detail = connected ? "handshake aborted by peer before any HTTP bytes"
                           : "handshake refused: " + conn.last_error();
    } else {
      std::string all;
      for (const auto& s : problems) all += (all.empty() ? "" : "; ") + s;
      r.detail = all;
    }
    results.push_back(std::move(r));
  }
  return results;
}

Result sealed_confidentiality(const config::TopologyConfig& base) {
  Result r;
  r.name = "sealed-confidentiality";
  try {
    auto topo = Topology::boot(sealed_variant(base));

    RequestSpec spec;
    spec.method = "POST";
    spec.target = "/api/vault";
    spec.body = "sealed run";

    auto client = topo.with_mfa(topo.client_anonymous());
    auto p = probe(topo, client, spec);
    if (!p.response) return Result::fail(r.name, "no response: " + p.error);

    std::vector<std::string> problems;
    auto path = chain_of(p.history);
    expect(problems, p.response->status == 200,
           "status " + std::to_string(p.response->status) + " != 200");
    expect(problems, path.size() >= 2, "expected a multi-hop chain, got " + join(path));

    std::uint64_t foreign_attempts = 0;
    for (const auto& fn : topo.functions()) {
      auto stats = topo.node_stats(fn);
      auto own = stats.value("sealed_own_opened", 0ULL);
      auto attempts = stats.value("sealed_foreign_attempts", 0ULL);
      auto opened = stats.value("sealed_foreign_opened", 0ULL);
      foreign_attempts += attempts;
      expect(problems, opened == 0,
             fn + " opened " + std::to_string(opened) + " foreign entries");
      if (std::count(path.begin(), path.end(), fn))
        expect(problems, own >= 1, fn + " never opened its own entry");
    }
    expect(problems, foreign_attempts >= 1, "no node ever probed a foreign entry");
    return judge(std::move(r), p, std::move(problems));
  } catch (const Error& e) {
    return Result::fail(r.name, std::string("sealed deployment failed: ") + e.what());
  }
}

Result latency_advantage(const config::TopologyConfig& base, int samples,
                         double min_margin_ms) {
  Result r;
  r.name = "latency-advantage";

  auto cfg = base;
  cfg.pep_listen = "127.0.0.1:0";
  cfg.pep_mgmt_listen = "127.0.0.1:0";
  cfg.service_listen = "127.0.0.1:0";
  for (auto& fn : cfg.functions) {
    fn.listen = "127.0.0.1:0";
    fn.delay_ms = 50;
  }
  std::optional<Topology> booted;
  try {
    booted.emplace(Topology::boot(cfg));
  } catch (const Error& e) {
    return Result::fail(r.name, std::string("latency deployment failed: ") + e.what());
  }
  auto& topo = *booted;

  auto run_batch = [&](const ClientMaterial& client,
                       const std::string& tag) -> std::vector<double> {
    std::vector<double> latencies;
    for (int i = 0; i < samples; ++i) {
      RequestSpec spec;
      spec.method = "POST";
      spec.target = "/api/latency/" + tag;
      spec.body = tag + " " + std::to_string(i);
      auto t0 = Clock::now();
      std::string err;
      auto res = harness::send_through_pep(topo, client, spec, &err);
      auto ms = ms_since(t0);
      if (!res || res->status != 200) return {};
      latencies.push_back(ms);
    }
    return latencies;
  };

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };

  auto ips_before = topo.node_invocations("ips");
  auto green = run_batch(topo.client_full(), "green");
  auto ips_after_green = topo.node_invocations("ips");
  auto blue = run_batch(topo.client_cert_only(), "blue");

  if (green.empty() || blue.empty())
    return Result::fail(r.name, "a batch request failed or was not served");

  double green_median = median(green);
  double blue_median = median(blue);
  double margin = blue_median - green_median;

  std::vector<std::string> problems;
  expect(problems, ips_after_green == ips_before,
         "trusted-path requests invoked the ips " +
             std::to_string(ips_after_green - ips_before) + " times");
  expect(problems, margin >= min_margin_ms,
         "margin " + std::to_string(margin) + " ms < required " +
             std::to_string(min_margin_ms) + " ms");

  r.latency_ms = green_median;
  r.invocations = {{"ips", ips_after_green - ips_before}};
  std::ostringstream detail;
  detail.setf(std::ios::fixed);
  detail.precision(1);
  detail << "median trusted " << green_median << " ms, compensated " << blue_median
         << " ms, margin " << margin << " ms over " << samples << "+" << samples
         << " requests";
  if (problems.empty()) {
    r.pass = true;
    r.detail = detail.str();
  } else {
    std::string all;
    for (const auto& s : problems) all += (all.empty() ? "" : "; ") + s;
    r.detail = all + " (" + detail.str() + ")";
  }
  return r;
}

Result startup_rejects_bad_policy(const config::TopologyConfig& base) {
  Result r;
  r.name = "startup-rejects-bad-policy";

  // Threshold no attribute set and no chain can reach: the entry point must
  // refuse to boot and say why.
  auto policy = config::load_policy_file(base.policy_path);
  std::int64_t attainable = 0;
  for (const auto& [_, w] : policy.attribute_weights) attainable += w;
  for (const auto& [_, u] : policy.function_uplift) attainable += u;
  policy.threshold = attainable + 1;

  auto dir = (fs::temp_directory_path() /
              ("ztsfc-badpolicy-" + crypto::hex_encode(crypto::random_bytes(4))))
                 .string();
  fs::create_directories(dir);
  auto pki = fs::absolute(base.pki_dir).string();
  {
    std::ofstream out(dir + "/policy.toml");
    out << config::render_policy(policy);
  }
  {
    std::ofstream out(dir + "/pep.toml");
    out << "[pep]\n"
        << "listen = \"127.0.0.1:0\"\n"
        << "mgmt_listen = \"127.0.0.1:0\"\n"
        << "service = \"127.0.0.1:1\"\n"
        << "policy = \"policy.toml\"\n"
        << "inventory = \"" << pki << "/inventory.csv\"\n\n"
        << "[pep.tls]\n"
        << "ca = \"" << pki << "/enterprise-ca.crt.pem\"\n"
        << "client_ca = \"" << pki << "/client-ca.crt.pem\"\n"
        << "cert = \"" << pki << "/pep.crt.pem\"\n"
        << "key = \"" << pki << "/pep.key.pem\"\n";
  }

  auto proc = harness::run_process(
      {harness::find_binary("ztsfc-pep"), "--config", dir + "/pep.toml"}, 10000);
  std::error_code ec;
  fs::remove_all(dir, ec);

  std::vector<std::string> problems;
  expect(problems, proc.exit_code != 0, "entry point started under an unreachable policy");
  expect(problems, proc.output.find("threshold") != std::string::npos,
         "diagnostic does not name the violated invariant: " + proc.output);
  if (problems.empty()) {
    r.pass = true;
    r.detail = "refused with: " + proc.output.substr(0, 160);
  } else {
    std::string all;
    for (const auto& s : problems) all += (all.empty() ? "" : "; ") + s;
    r.detail = all;
  }
  return r;
}

Result soak(Topology& topo, int concurrency) {
  Result r;
  r.name = "soak-" + std::to_string(concurrency);

  auto history_before = topo.pep_history().size();
  auto service_before = topo.service_invocations();

  struct PerRequest {
    bool ok = false;
    std::string rid;
    std::string problem;
  };
  std::vector<PerRequest> outcomes(static_cast<std::size_t>(concurrency));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(concurrency));

  for (int i = 0; i < concurrency; ++i) {
    workers.emplace_back([&topo, &outcomes, i] {
      auto& slot = outcomes[static_cast<std::size_t>(i)];
      bool green = (i % 2) == 0;
      auto client = green ? topo.client_full() : topo.client_cert_only();

      RequestSpec spec;
      spec.method = "POST";
      spec.target = "/soak/" + std::to_string(i);
      spec.body = "soak payload " + std::to_string(i) + " " +
                  crypto::hex_encode(crypto::random_bytes(12));
      spec.headers = {{"X-Soak-Index", std::to_string(i)}};

      std::string err;
      auto res = harness::send_through_pep(topo, client, spec, &err);
      if (!res) {
        slot.problem = "no response: " + err;
        return;
      }
      if (res->status != 200) {
        slot.problem = "status " + std::to_string(res->status);
        return;
      }
      auto rid = response_rid(*res);
      if (!rid) {
        slot.problem = "no request id";
        return;
      }
      slot.rid = *rid;

      auto echoed = nlohmann::json::parse(res->body, nullptr, false);
      if (echoed.is_discarded()) {
        slot.problem = "unparseable echo body";
        return;
      }
      auto expected_b64 = crypto::b64url_encode(crypto::as_bytes(spec.body));
      if (echoed.value("body_b64", "") != expected_b64) {
        slot.problem = "echoed body belongs to another request";
        return;
      }
      if (echoed.value("target", "") != spec.target) {
        slot.problem = "echoed target belongs to another request";
        return;
      }
      auto headers = echoed.value("headers", nlohmann::json::object());
      auto idx = headers.value("X-Soak-Index", nlohmann::json::array());
      if (idx.size() != 1 || idx[0].get<std::string>() != std::to_string(i)) {
        slot.problem = "request header bled across requests";
        return;
      }
      slot.ok = true;
    });
  }
  for (auto& w : workers) w.join();

  std::vector<std::string> problems;
  int failures = 0;
  for (const auto& o : outcomes)
    if (!o.ok) {
      ++failures;
      if (problems.size() < 3) problems.push_back(o.problem);
    }
  if (failures > 3)
    problems.push_back("... " + std::to_string(failures) + " requests failed in total");

  std::set<std::string> rids;
  for (const auto& o : outcomes)
    if (!o.rid.empty()) rids.insert(o.rid);
  expect(problems, rids.size() == static_cast<std::size_t>(concurrency),
         "request ids not unique: " + std::to_string(rids.size()) + "/" +
             std::to_string(concurrency));

  auto history = topo.pep_history();
  expect(problems,
         history.size() == history_before + static_cast<std::size_t>(concurrency),
         "history grew by " + std::to_string(history.size() - history_before) +
             " records for " + std::to_string(concurrency) + " requests");
  std::size_t matched = 0;
  for (const auto& rec : history)
    if (rids.count(rec.value("request_id", ""))) ++matched;
  expect(problems, matched == rids.size(), "some requests have no history record");
  expect(problems,
         topo.service_invocations() == service_before + static_cast<std::uint64_t>(concurrency),
         "service did not see every request exactly once");

  r.invocations = {{"service", topo.service_invocations() - service_before}};
  if (problems.empty()) {
    r.pass = true;
    r.detail = std::to_string(concurrency) + " concurrent requests, all isolated";
  } else {
    std::string all;
    for (const auto& s : problems) all += (all.empty() ? "" : "; ") + s;
    r.detail = all;
  }
  return r;
}

Report run_suite(const config::TopologyConfig& base) {
  Report report;
  auto topo = Topology::boot(base);

  report.results.push_back(
      routing(topo, "routing-trusted", topo.client_full(), {}));
  report.results.push_back(
      routing(topo, "routing-cert-only", topo.client_cert_only(), {"ips"}));
  report.results.push_back(routing(topo, "routing-managed-only",
                                   topo.with_mfa(topo.client_managed_only()), {"mfa"}));
  report.results.push_back(routing(topo, "routing-untrusted",
                                   topo.with_mfa(topo.client_anonymous()),
                                   {"mfa", "ips"}));

  report.results.push_back(ips_drop(topo));
  report.results.push_back(mfa_wrong_code(topo));
  report.results.push_back(mfa_challenge(topo));
  report.results.push_back(foreign_certificate(topo));

  for (auto& r : pot_tamper(topo)) report.results.push_back(std::move(r));
  for (auto& r : segmentation(topo)) report.results.push_back(std::move(r));

  report.results.push_back(sealed_confidentiality(base));
  report.results.push_back(latency_advantage(base));
  report.results.push_back(startup_rejects_bad_policy(base));
  return report;
}

}  // namespace ztsfc::scenarios
