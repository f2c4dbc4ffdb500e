#include "ztsfc/node_runtime.hpp"

#include <chrono>
#include <ctime>
#include <thread>

#include <json.hpp>

#include "ztsfc/chain_codec.hpp"
#include "ztsfc/errors.hpp"
#include "ztsfc/history.hpp"
#include "ztsfc/pot.hpp"
#include "ztsfc/tls.hpp"

namespace ztsfc {
namespace {

SfNode::VerdictFn make_verdict(const config::NodeConfig& cfg) {
  if (cfg.kind == "ips") {
    if (cfg.rules_path.empty())
      throw ConfigError("ips node needs a ruleset (node.ips.rules)");
    auto rules = std::make_shared<sf::IpsRuleset>(sf::IpsRuleset::load_file(cfg.rules_path));
    return [rules](const sf::RequestView& r) { return rules->inspect(r); };
  }
  if (cfg.kind == "mfa") {
    if (cfg.users_path.empty())
      throw ConfigError("mfa node needs a user store (node.mfa.users)");
    auto users = std::make_shared<sf::MfaUserStore>(sf::MfaUserStore::load_file(cfg.users_path));
    return [users](const sf::RequestView& r) {
      return sf::mfa_verify(r, *users, std::time(nullptr));
    };
  }
  if (cfg.kind == "pass") {
    return [](const sf::RequestView& r) { return sf::pass_through(r); };
  }
  throw ConfigError("unknown function kind '" + cfg.kind + "'");
}

struct NextHop {
  std::string address;
  std::optional<std::string> remaining_plain;
  std::optional<std::string> remaining_sealed;
};

}  // namespace

SfNode::SfNode(config::NodeConfig cfg, std::string pep_cert_path)
    : cfg_(std::move(cfg)), verdict_(make_verdict(cfg_)) {
  auto cert = crypto::load_certificate_file(cfg_.tls.cert);
  auto cn = crypto::certificate_common_name(cert.get());
  if (cn != cfg_.function)
    throw ConfigError("certificate CN '" + cn + "' does not match function id '" +
                      cfg_.function + "'");
  own_key_ = crypto::load_private_key_file(cfg_.tls.key);
  if (!pep_cert_path.empty())
    verifier_key_ = crypto::public_key_of_certificate(pep_cert_path);

  server_ = std::make_unique<httplib::SSLServer>(cfg_.tls.cert.c_str(),
                                                 cfg_.tls.key.c_str(),
                                                 cfg_.tls.ca.c_str());
  if (!server_->is_valid()) throw ConfigError("node: bad TLS material");

  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    handle(req, res);
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
  server_->Put(".*", handler);
  server_->Patch(".*", handler);
  server_->Delete(".*", handler);
  server_->Options(".*", handler);
}

SfNode::~SfNode() { stop(); }

void SfNode::handle(const httplib::Request& req, httplib::Response& res) {
  if (req.target == "/sfc/health") {
    res.set_content("{\"status\":\"ok\"}", "application/json");
    return;
  }
  if (req.target == "/sfc/stats") {
    nlohmann::json stats{
        {"function", cfg_.function},
        {"invocations", stats_.invocations.load()},
        {"passes", stats_.passes.load()},
        {"drops", stats_.drops.load()},
        {"challenges", stats_.challenges.load()},
        {"forward_failures", stats_.forward_failures.load()},
        {"sealed_own_opened", stats_.sealed_own_opened.load()},
        {"sealed_foreign_attempts", stats_.sealed_foreign_attempts.load()},
        {"sealed_foreign_opened", stats_.sealed_foreign_opened.load()},
    };
    res.set_content(stats.dump(), "application/json");
    return;
  }

  stats_.invocations.fetch_add(1);
  if (cfg_.delay_ms > 0)
    std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.delay_ms));

  auto rid_header = req.headers.find(chain::kRequestIdHeader);
  std::string rid = rid_header == req.headers.end() ? "" : rid_header->second;
  auto rid_bytes = crypto::hex_decode(rid);
  if (!rid_bytes || rid_bytes->size() != pot::kRequestIdLen) {
    drop(rid, "chain-protocol: missing or malformed request id", res);
    return;
  }

  // The function inspects the request as the client wrote it, not the chain
  // plumbing around it.
  Headers visible = tls::forwardable_headers(req.headers);
  chain::strip_internal_headers(visible);
  sf::RequestView view{req.method, req.target, &visible, req.body};
  auto verdict = verdict_(view);

  if (verdict.kind == sf::Verdict::Kind::Challenge) {
    stats_.challenges.fetch_add(1);
    res.status = 401;
    res.set_header("WWW-Authenticate", "ZTSFC-MFA realm=\"" + cfg_.function + "\"");
    res.set_header(chain::kChallengeHeader, cfg_.function);
    res.set_content("credentials required\n", "text/plain");
    return;
  }
  if (verdict.kind == sf::Verdict::Kind::Drop) {
    drop(rid, verdict.reason, res);
    return;
  }

  // Resolve the next hop from whichever chain encoding rode in.
  auto plain = req.headers.find(chain::kChainHeader);
  auto sealed = req.headers.find(chain::kSealedChainHeader);
  NextHop next;
  try {
    if ((plain != req.headers.end()) == (sealed != req.headers.end())) {
      drop(rid, "chain-protocol: expected exactly one chain header", res);
      return;
    }
    if (plain != req.headers.end()) {
      auto popped = chain::pop_next_hop(plain->second);
      next.address = popped.next;
      next.remaining_plain = popped.remaining;
    } else {
      auto entries = chain::parse_sealed_chain(sealed->second);
      if (cfg_.probe_sealed) {
        for (std::size_t i = 1; i < entries.size(); ++i) {
          stats_.sealed_foreign_attempts.fetch_add(1);
          if (chain::open_entry(entries[i], own_key_.get()))
            stats_.sealed_foreign_opened.fetch_add(1);
        }
      }
      if (entries.front().recipient != cfg_.function) {
        drop(rid, "chain-protocol: entry not addressed to this function", res);
        return;
      }
      auto address = chain::open_entry(entries.front(), own_key_.get());
      if (!address) {
        drop(rid, "chain-protocol: cannot open sealed entry", res);
        return;
      }
      stats_.sealed_own_opened.fetch_add(1);
      next.address = *address;
      entries.erase(entries.begin());
      next.remaining_sealed = chain::encode_sealed_chain(entries);
    }
  } catch (const CodecError& e) {
    drop(rid, std::string("chain-protocol: ") + e.what(), res);
    return;
  }

  // Forwarded request: received request minus our chain entry and consumed
  // headers, plus our transit token.
  Headers out_headers = tls::forwardable_headers(req.headers);
  out_headers.erase(chain::kChainHeader);
  out_headers.erase(chain::kSealedChainHeader);
  for (const auto& name : verdict.scrub_headers) out_headers.erase(name);
  if (next.remaining_plain) out_headers.emplace(chain::kChainHeader, *next.remaining_plain);
  if (next.remaining_sealed)
    out_headers.emplace(chain::kSealedChainHeader, *next.remaining_sealed);

  if (verifier_key_) {
    auto digest = canonical_request_digest(req.method, req.target, req.body);
    auto token = pot::make_token(*rid_bytes, cfg_.function, digest, verifier_key_.get(),
                                 static_cast<std::int64_t>(std::time(nullptr)));
    auto existing = out_headers.find(chain::kPotHeader);
    if (existing != out_headers.end()) {
      std::string merged = existing->second + "," + token;
      out_headers.erase(chain::kPotHeader);
      out_headers.emplace(chain::kPotHeader, merged);
    } else {
      out_headers.emplace(chain::kPotHeader, token);
    }
  }

  auto target = parse_host_port(next.address);
  if (!target) {
    drop(rid, "chain-protocol: bad next-hop address", res);
    return;
  }
  auto client = tls::make_client(*target, cfg_.tls);
  httplib::Request upstream;
  upstream.method = req.method;
  upstream.path = req.target;
  for (const auto& [name, value] : out_headers) upstream.headers.emplace(name, value);
  upstream.body = req.body;

  httplib::Response upstream_res;
  httplib::Error err = httplib::Error::Success;
  if (!client->send(upstream, upstream_res, err)) {
    stats_.forward_failures.fetch_add(1);
    res.status = 502;
    res.set_content("upstream unreachable\n", "text/plain");
    return;
  }

  stats_.passes.fetch_add(1);
  res.status = upstream_res.status;
  for (const auto& [name, value] : upstream_res.headers) {
    if (tls::is_transport_header(name)) continue;
    res.set_header(name, value);
  }
  res.body = upstream_res.body;
}

void SfNode::drop(const std::string& request_id, const std::string& reason,
                  httplib::Response& res) {
  stats_.drops.fetch_add(1);
  if (!request_id.empty()) send_feedback(request_id, reason);
  res.status = 403;
  res.set_header(chain::kDropHeader, cfg_.function + ":" + reason);
  res.set_content("request dropped\n", "text/plain");
}

void SfNode::send_feedback(const std::string& request_id, const std::string& reason) {
  if (cfg_.pep_mgmt.empty()) return;
  auto target = parse_host_port(cfg_.pep_mgmt);
  if (!target) return;

  nlohmann::json event{
      {"request_id", request_id},
      {"function_id", cfg_.function},
      {"verdict", "drop"},
      {"reason", reason},
  };
  std::string body = event.dump();

  // At-least-once within the request lifetime: one retry, then give up and
  // rely on the 403 we are about to send anyway.
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto client = tls::make_client(*target, cfg_.tls, 2000, 5000);
    auto result = client->Post("/sfc/feedback", body, "application/json");
    if (result && result->status == 200) return;
  }
  fprintf(stderr, "[%s] feedback for %s undeliverable\n", cfg_.function.c_str(),
          request_id.c_str());
}

int SfNode::bind() {
  auto addr = parse_listen_address(cfg_.listen);
  if (!addr) return -1;
  if (addr->port == 0) return server_->bind_to_any_port(addr->host);
  return server_->bind_to_port(addr->host, addr->port) ? addr->port : -1;
}

bool SfNode::serve() { return server_->listen_after_bind(); }

void SfNode::stop() {
  if (server_) server_->stop();
}

bool SfNode::wait_until_ready(int timeout_ms) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (std::chrono::steady_clock::now() < deadline) {
    if (server_->is_running()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return server_->is_running();
}

}  // namespace ztsfc
