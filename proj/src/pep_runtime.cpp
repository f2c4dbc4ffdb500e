#include "ztsfc/pep_runtime.hpp"

#include <openssl/ssl.h>
#include <openssl/x509.h>

#include <chrono>
#include <cstdio>

#include "ztsfc/errors.hpp"
#include "ztsfc/http_common.hpp"
#include "ztsfc/pot.hpp"

namespace ztsfc {
namespace {

Headers to_headers(const httplib::Headers& in) {
  Headers out;
  for (const auto& [name, value] : in) out.emplace(name, value);
  return out;
}

std::string all_values(const httplib::Headers& headers, const std::string& name) {
  std::string joined;
  auto [lo, hi] = headers.equal_range(name);
  for (auto it = lo; it != hi; ++it) {
    if (!joined.empty()) joined += ",";
    joined += it->second;
  }
  return joined;
}

}  // namespace

PepServer::PepServer(config::PepConfig cfg)
    : cfg_(std::move(cfg)),
      policy_(config::load_policy_file(cfg_.policy_path)),
      client_store_(tls::load_store(cfg_.tls.client_ca)),
      own_key_(crypto::load_private_key_file(cfg_.tls.key)),
      history_log_(cfg_.history_path),
      feedback_log_(cfg_.feedback_path) {
  if (!cfg_.inventory_path.empty())
    inventory_ = DeviceInventory::load_file(cfg_.inventory_path);

  if (cfg_.seal) {
    auto doc = toml::Document::parse_file(cfg_.policy_path);
    auto cert_paths = config::policy_function_certs(doc, cfg_.policy_path);
    for (const auto& [fn, _] : policy_.function_registry) {
      auto it = cert_paths.find(fn);
      if (it == cert_paths.end())
        throw ConfigError("sealing enabled but no certificate for function '" + fn + "'");
      seal_keys_.emplace(fn, crypto::public_key_of_certificate(it->second));
    }
  }

  // Data port: present our certificate, request the client's, accept the
  // handshake regardless. Identity feeds the trust score per request; an
  // unknown requester is a low-trust requester, not a dropped connection.
  data_server_ = std::make_unique<httplib::SSLServer>([this](SSL_CTX& ctx) {
    if (SSL_CTX_use_certificate_chain_file(&ctx, cfg_.tls.cert.c_str()) != 1) return false;
    if (SSL_CTX_use_PrivateKey_file(&ctx, cfg_.tls.key.c_str(), SSL_FILETYPE_PEM) != 1)
      return false;
    SSL_CTX_set_verify(
        &ctx, SSL_VERIFY_PEER,
        [](int, X509_STORE_CTX*) -> int { return 1; });
    if (auto* names = SSL_load_client_CA_file(cfg_.tls.client_ca.c_str()))
      SSL_CTX_set_client_CA_list(&ctx, names);
    return true;
  });
  if (!data_server_->is_valid()) throw ConfigError("entry listener: bad TLS material");

  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    handle(req, res);
  };
  data_server_->Get(".*", handler);
  data_server_->Post(".*", handler);
  data_server_->Put(".*", handler);
  data_server_->Patch(".*", handler);
  data_server_->Delete(".*", handler);
  data_server_->Options(".*", handler);

  // Management port: functions only, mutual TLS against the enterprise CA.
  mgmt_server_ = std::make_unique<httplib::SSLServer>(
      cfg_.tls.cert.c_str(), cfg_.tls.key.c_str(), cfg_.tls.ca.c_str());
  if (!mgmt_server_->is_valid()) throw ConfigError("management listener: bad TLS material");

  mgmt_server_->Post("/sfc/feedback", [this](const httplib::Request& req,
                                             httplib::Response& res) {
    handle_feedback(req, res);
  });
  mgmt_server_->Get("/sfc/history", [this](const httplib::Request&, httplib::Response& res) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : history_snapshot()) arr.push_back(rec.to_json());
    res.set_content(arr.dump(), "application/json");
  });
  mgmt_server_->Get("/sfc/feedback", [this](const httplib::Request&, httplib::Response& res) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ev : feedback_snapshot()) arr.push_back(ev.to_json());
    res.set_content(arr.dump(), "application/json");
  });
  mgmt_server_->Get("/sfc/stats", [this](const httplib::Request&, httplib::Response& res) {
    nlohmann::json stats{
        {"requests", stats_.requests.load()},
        {"served", stats_.served.load()},
        {"denied", stats_.denied.load()},
        {"dropped", stats_.dropped.load()},
        {"pot_failures", stats_.pot_failures.load()},
        {"upstream_errors", stats_.upstream_errors.load()},
    };
    res.set_content(stats.dump(), "application/json");
  });
  mgmt_server_->Get("/sfc/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"status\":\"ok\"}", "application/json");
  });
}

PepServer::~PepServer() { stop(); }

void PepServer::handle(const httplib::Request& req, httplib::Response& res) {
  auto started = std::chrono::steady_clock::now();
  stats_.requests.fetch_add(1);

  auto rid_bytes = crypto::random_bytes(pot::kRequestIdLen);
  auto rid = crypto::hex_encode(rid_bytes);
  // Clients get the request id back for support correlation; internal
  // response headers are stripped before relay, so this is the only one.
  res.set_header(chain::kRequestIdHeader, rid);

  // TLS-level facts for this connection.
  ConnectionInfo conn;
  auto* ssl = const_cast<SSL*>(req.ssl);
  std::string client_cn = "anonymous";
  if (ssl) {
    conn.peer_cert_present = SSL_get0_peer_certificate(ssl) != nullptr;
    conn.peer_cert_valid = tls::peer_verified(ssl, client_store_.get());
    conn.channel_binding = tls::channel_binding(ssl);
    if (conn.peer_cert_valid) client_cn = tls::peer_common_name(ssl);
  }

  Headers raw = to_headers(req.headers);
  std::string diag;
  auto attrs = derive_attributes(conn, raw, inventory_, &diag);
  auto decision = select_chain(attrs, policy_, cfg_.service);

  HistoryRecord rec;
  rec.request_id = rid;
  rec.client = client_cn;
  rec.method = req.method;
  rec.target = req.target;
  rec.attributes.assign(attrs.present.begin(), attrs.present.end());
  rec.score = score(attrs, policy_).value;
  rec.started_at_ms = now_ms();
  if (!diag.empty())
    std::fprintf(stderr, "[pep] %s device assertion: %s\n", rid.c_str(), diag.c_str());

  if (!decision.allowed()) {
    res.status = 403;
    res.set_content("forbidden\n", "text/plain");
    finish(std::move(rec), Outcome::Denied, decision.reason, 403, started);
    return;
  }
  const auto& hops = decision.plan.hops;
  rec.chain = decision.plan.function_ids();

  // The request we forward: client headers minus connection plumbing, minus
  // anything in the internal namespace. Internal headers are ours to write;
  // a client that sets them is spoofed away right here.
  Headers fwd = tls::forwardable_headers(req.headers);
  chain::strip_internal_headers(fwd);

  std::string first_address = hops.empty() ? cfg_.service : hops.front().address;
  if (!hops.empty()) {
    fwd.emplace(chain::kRequestIdHeader, rid);
    if (cfg_.seal) {
      std::vector<chain::SealSpec> specs;
      for (std::size_t i = 0; i < hops.size(); ++i)
        specs.push_back({hops[i].function,
                         i + 1 < hops.size() ? hops[i + 1].address : cfg_.service});
      std::map<FunctionId, EVP_PKEY*> keys;
      for (const auto& [fn, key] : seal_keys_) keys.emplace(fn, key.get());
      fwd.emplace(chain::kSealedChainHeader, chain::seal_chain(specs, keys));
    } else {
      std::vector<std::string> payloads;
      for (std::size_t i = 1; i < hops.size(); ++i) payloads.push_back(hops[i].address);
      payloads.push_back(cfg_.service);
      if (auto header = chain::encode_chain(payloads))
        fwd.emplace(chain::kChainHeader, *header);
    }
    register_inflight(rid);
  }

  auto digest = canonical_request_digest(req.method, req.target, req.body);

  auto target = parse_host_port(first_address);
  if (!target) {
    res.status = 502;
    res.set_content("bad upstream address\n", "text/plain");
    finish(std::move(rec), Outcome::UpstreamError, "registry address unusable", 502, started);
    return;
  }
  auto client = tls::make_client(*target, cfg_.tls, cfg_.connect_timeout_ms,
                                 cfg_.request_budget_ms);
  httplib::Request upstream;
  upstream.method = req.method;
  upstream.path = req.target;
  for (const auto& [name, value] : fwd) upstream.headers.emplace(name, value);
  upstream.body = req.body;

  httplib::Response up;
  httplib::Error err = httplib::Error::Success;
  bool sent = client->send(upstream, up, err);

  // A drop report beats whatever came back over the data path: the function's
  // word is authoritative, and it files the report before answering 403.
  if (auto fb = take_inflight(rid)) {
    res.status = 403;
    res.set_content("request dropped\n", "text/plain");
    finish(std::move(rec), Outcome::DroppedByFunction, fb->function_id + ": " + fb->reason,
           403, started);
    return;
  }

  if (!sent) {
    res.status = 502;
    res.set_content("upstream unreachable\n", "text/plain");
    finish(std::move(rec), Outcome::UpstreamError, "chain entry unreachable", 502, started);
    return;
  }

  if (up.status == 401 && up.has_header(chain::kChallengeHeader)) {
    // A function wants credentials before it lets the request pass. Relay the
    // challenge; no transit proof is expected of an unfinished chain.
    res.status = 401;
    for (const auto& [name, value] : up.headers) {
      if (tls::is_transport_header(name) || chain::is_internal_header(name)) continue;
      res.set_header(name, value);
    }
    res.body = up.body;
    finish(std::move(rec), Outcome::Denied, "challenge: credentials required", 401, started);
    return;
  }

  if (up.status == 403) {
    if (auto marker = up.get_header_value(chain::kDropHeader); !marker.empty()) {
      res.status = 403;
      res.set_content("request dropped\n", "text/plain");
      finish(std::move(rec), Outcome::DroppedByFunction, marker, 403, started);
      return;
    }
  }

  if (up.status == 502 && !hops.empty() && !up.has_header(chain::kPotHeader)) {
    res.status = 502;
    res.set_content("upstream unreachable\n", "text/plain");
    finish(std::move(rec), Outcome::UpstreamError, "a hop could not reach its successor",
           502, started);
    return;
  }

  if (cfg_.pot && !hops.empty()) {
    auto tokens = pot::split_header(all_values(up.headers, chain::kPotHeader));
    auto verdict = pot::verify(tokens, decision.plan.function_ids(), rid_bytes, digest,
                               own_key_.get());
    if (!verdict.ok) {
      res.status = 502;
      res.set_content("transit proof failed\n", "text/plain");
      finish(std::move(rec), Outcome::PotFailure, verdict.reason, 502, started);
      return;
    }
  }

  res.status = up.status;
  for (const auto& [name, value] : up.headers) {
    if (tls::is_transport_header(name) || chain::is_internal_header(name)) continue;
    res.set_header(name, value);
  }
  res.body = up.body;
  finish(std::move(rec), Outcome::Served, "", up.status, started);
}

void PepServer::handle_feedback(const httplib::Request& req, httplib::Response& res) {
  auto parsed = nlohmann::json::parse(req.body, nullptr, false);
  auto event = parsed.is_discarded() ? std::nullopt : FeedbackEvent::from_json(parsed);
  if (!event) {
    res.status = 400;
    res.set_content("{\"error\":\"malformed feedback\"}", "application/json");
    return;
  }

  bool known = false;
  {
    std::lock_guard lock(mu_);
    feedback_.push_back(*event);
    auto it = inflight_.find(event->request_id);
    if (it != inflight_.end()) {
      if (!it->second) it->second = *event;  // first report wins
      known = true;
    }
  }
  feedback_log_.append(event->to_json());
  if (!known)
    std::fprintf(stderr, "[pep] feedback for unknown request %s from %s\n",
                 event->request_id.c_str(), event->function_id.c_str());
  res.set_content("{\"status\":\"ok\"}", "application/json");
}

void PepServer::register_inflight(const std::string& request_id) {
  std::lock_guard lock(mu_);
  inflight_.emplace(request_id, std::nullopt);
}

std::optional<FeedbackEvent> PepServer::take_inflight(const std::string& request_id) {
  std::lock_guard lock(mu_);
  auto it = inflight_.find(request_id);
  if (it == inflight_.end()) return std::nullopt;
  auto event = std::move(it->second);
  inflight_.erase(it);
  return event;
}

void PepServer::finish(HistoryRecord rec, Outcome outcome, std::string detail, int status,
                       std::chrono::steady_clock::time_point started) {
  rec.outcome = outcome;
  rec.detail = std::move(detail);
  rec.status = status;
  rec.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)
                        .count();
  switch (outcome) {
    case Outcome::Served: stats_.served.fetch_add(1); break;
    case Outcome::Denied: stats_.denied.fetch_add(1); break;
    case Outcome::DroppedByFunction: stats_.dropped.fetch_add(1); break;
    case Outcome::PotFailure: stats_.pot_failures.fetch_add(1); break;
    case Outcome::UpstreamError: stats_.upstream_errors.fetch_add(1); break;
  }

  auto line = rec.to_json();
  {
    std::lock_guard lock(mu_);
    history_.push_back(std::move(rec));
    std::printf("%s\n", line.dump().c_str());
    std::fflush(stdout);
  }
  history_log_.append(line);
}

int PepServer::bind() {
  auto addr = parse_listen_address(cfg_.listen);
  if (!addr) return -1;
  if (addr->port == 0) return data_server_->bind_to_any_port(addr->host);
  return data_server_->bind_to_port(addr->host, addr->port) ? addr->port : -1;
}

int PepServer::bind_mgmt() {
  auto addr = parse_listen_address(cfg_.mgmt_listen);
  if (!addr) return -1;
  if (addr->port == 0) return mgmt_server_->bind_to_any_port(addr->host);
  return mgmt_server_->bind_to_port(addr->host, addr->port) ? addr->port : -1;
}

bool PepServer::serve() {
  mgmt_thread_ = std::thread([this] { mgmt_server_->listen_after_bind(); });
  return data_server_->listen_after_bind();
}

void PepServer::stop() {
  if (data_server_) data_server_->stop();
  if (mgmt_server_) mgmt_server_->stop();
  if (mgmt_thread_.joinable()) mgmt_thread_.join();
}

bool PepServer::wait_until_ready(int timeout_ms) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (std::chrono::steady_clock::now() < deadline) {
    if (data_server_->is_running() && mgmt_server_->is_running()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return data_server_->is_running() && mgmt_server_->is_running();
}

std::vector<HistoryRecord> PepServer::history_snapshot() const {
  std::lock_guard lock(mu_);
  return history_;
}

std::vector<FeedbackEvent> PepServer::feedback_snapshot() const {
  std::lock_guard lock(mu_);
  return feedback_;
}

}  // namespace ztsfc
