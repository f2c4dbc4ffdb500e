#include "ztsfc/echo_service.hpp"

#include <chrono>
#include <thread>

#include <json.hpp>

#include "ztsfc/chain_codec.hpp"
#include "ztsfc/crypto.hpp"
#include "ztsfc/errors.hpp"
#include "ztsfc/pot.hpp"
#include "ztsfc/tls.hpp"

namespace ztsfc {
namespace {

std::string tampered_pot(const std::string& value, const std::string& how) {
  auto tokens = pot::split_header(value);
  if (tokens.empty()) return value;
  if (how == "drop-first") {
    tokens.erase(tokens.begin());
  } else if (how == "dup-first") {
    tokens.push_back(tokens.front());
  } else if (how == "flip-first") {
    auto blob = crypto::b64url_decode(tokens.front());
    if (blob && !blob->empty()) {
      blob->back() ^= 0x01;
      tokens.front() = crypto::b64url_encode(*blob);
    }
  }
  return pot::join_header(tokens);
}

}  // namespace

EchoService::EchoService(const config::TlsPaths& tls) {
  server_ = std::make_unique<httplib::SSLServer>(tls.cert.c_str(), tls.key.c_str(),
                                                 tls.ca.c_str());
  if (!server_->is_valid()) throw ConfigError("echo service: bad TLS material");

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

EchoService::~EchoService() { stop(); }

void EchoService::handle(const httplib::Request& req, httplib::Response& res) {
  if (req.target == "/sfc/health") {
    res.set_content("{\"status\":\"ok\"}", "application/json");
    return;
  }
  if (req.target == "/sfc/stats") {
    nlohmann::json stats{{"invocations", invocations_.load()}};
    res.set_content(stats.dump(), "application/json");
    return;
  }

  invocations_.fetch_add(1);

  nlohmann::json headers = nlohmann::json::object();
  for (const auto& [name, value] : req.headers) {
    if (tls::is_transport_header(name)) continue;
    headers[name].push_back(value);
  }
  nlohmann::json body{
      {"method", req.method},
      {"target", req.target},
      {"headers", headers},
      {"body_b64", crypto::b64url_encode(crypto::as_bytes(req.body))},
  };
  res.set_content(body.dump(), "application/json");

  // Return the transit proof to the verifier, optionally sabotaged on request.
  if (auto pot_value = req.headers.find(chain::kPotHeader); pot_value != req.headers.end()) {
    auto tamper = req.headers.find(kEchoTamperHeader);
    res.set_header(chain::kPotHeader,
                   tamper == req.headers.end()
                       ? pot_value->second
                       : tampered_pot(pot_value->second, tamper->second));
  }
}

int EchoService::bind(const HostPort& addr) {
  if (addr.port == 0) return server_->bind_to_any_port(addr.host);
  return server_->bind_to_port(addr.host, addr.port) ? addr.port : -1;
}

bool EchoService::serve() { return server_->listen_after_bind(); }

void EchoService::stop() {
  if (server_) server_->stop();
}

bool EchoService::wait_until_ready(int timeout_ms) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (std::chrono::steady_clock::now() < deadline) {
    if (server_->is_running()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return server_->is_running();
}

}  // namespace ztsfc
