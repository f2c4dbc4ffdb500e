#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>

#include <httplib.h>

#include "ztsfc/config.hpp"
#include "ztsfc/crypto.hpp"
#include "ztsfc/security_functions.hpp"

namespace ztsfc {

struct NodeStats {
  std::atomic<std::uint64_t> invocations{0};
  std::atomic<std::uint64_t> passes{0};
  std::atomic<std::uint64_t> drops{0};
  std::atomic<std::uint64_t> challenges{0};
  std::atomic<std::uint64_t> forward_failures{0};
  // Sealed-chain probe: how often this node tried (and managed) to read
  // entries addressed to other functions. The managed count must stay zero.
  std::atomic<std::uint64_t> sealed_own_opened{0};
  std::atomic<std::uint64_t> sealed_foreign_attempts{0};
  std::atomic<std::uint64_t> sealed_foreign_opened{0};
};

// One hop of the chain: terminates mutual TLS from the previous hop, runs its
// security function, pops its chain entry, and forwards over fresh mutual TLS.
class SfNode {
 public:
  using VerdictFn = std::function<sf::Verdict(const sf::RequestView&)>;

  // pep_cert_path carries the verifier's public key for transit proofs.
  SfNode(config::NodeConfig cfg, std::string pep_cert_path);
  ~SfNode();

  int bind();    // returns effective port, -1 on failure
  bool serve();  // blocking
  void stop();
  bool wait_until_ready(int timeout_ms = 5000);

  const NodeStats& stats() const { return stats_; }
  const config::NodeConfig& config() const { return cfg_; }

 private:
  void handle(const httplib::Request& req, httplib::Response& res);
  void drop(const std::string& request_id, const std::string& reason,
            httplib::Response& res);
  void send_feedback(const std::string& request_id, const std::string& reason);

  config::NodeConfig cfg_;
  VerdictFn verdict_;
  crypto::PkeyPtr own_key_;       // opens sealed entries addressed to us
  crypto::PkeyPtr verifier_key_;  // public key transit proofs are sealed to
  std::unique_ptr<httplib::SSLServer> server_;
  NodeStats stats_;
};

}  // namespace ztsfc
