#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "ztsfc/chain_codec.hpp"
#include "ztsfc/config.hpp"
#include "ztsfc/crypto.hpp"
#include "ztsfc/history.hpp"
#include "ztsfc/inventory.hpp"
#include "ztsfc/tls.hpp"
#include "ztsfc/trust.hpp"

namespace ztsfc {

struct PepStats {
  std::atomic<std::uint64_t> requests{0};
  std::atomic<std::uint64_t> served{0};
  std::atomic<std::uint64_t> denied{0};
  std::atomic<std::uint64_t> dropped{0};
  std::atomic<std::uint64_t> pot_failures{0};
  std::atomic<std::uint64_t> upstream_errors{0};
};

// Policy enforcement point: terminates client TLS, scores the requester,
// injects the compensating chain, and arbitrates the final outcome from
// upstream responses, drop feedback, and transit proofs.
//
// Two listeners: the data port takes client traffic (client certificates
// requested but optional — identity raises trust, it is not an entry ticket);
// the management port speaks mutual TLS with the functions for feedback and
// exposes history to operators.
class PepServer {
 public:
  explicit PepServer(config::PepConfig cfg);
  ~PepServer();

  int bind();       // data port; effective port, -1 on failure
  int bind_mgmt();  // management port; effective port, -1 on failure
  bool serve();     // blocking; runs the management listener on a thread
  void stop();
  bool wait_until_ready(int timeout_ms = 5000);

  std::vector<HistoryRecord> history_snapshot() const;
  std::vector<FeedbackEvent> feedback_snapshot() const;
  const PepStats& stats() const { return stats_; }

 private:
  void handle(const httplib::Request& req, httplib::Response& res);
  void handle_feedback(const httplib::Request& req, httplib::Response& res);

  void register_inflight(const std::string& request_id);
  std::optional<FeedbackEvent> take_inflight(const std::string& request_id);

  // Seals the outcome: one history record per request, everywhere it goes.
  void finish(HistoryRecord rec, Outcome outcome, std::string detail, int status,
              std::chrono::steady_clock::time_point started);

  config::PepConfig cfg_;
  TrustPolicy policy_;
  DeviceInventory inventory_;
  tls::StorePtr client_store_;              // validates end-client certificates
  crypto::PkeyPtr own_key_;                 // decrypts transit proofs
  std::map<FunctionId, crypto::PkeyPtr> seal_keys_;  // per-function entry sealing

  std::unique_ptr<httplib::SSLServer> data_server_;
  std::unique_ptr<httplib::SSLServer> mgmt_server_;
  std::thread mgmt_thread_;

  mutable std::mutex mu_;
  std::map<std::string, std::optional<FeedbackEvent>> inflight_;
  std::vector<HistoryRecord> history_;
  std::vector<FeedbackEvent> feedback_;
  NdjsonLog history_log_;
  NdjsonLog feedback_log_;
  PepStats stats_;
};

}  // namespace ztsfc
