#pragma once

#include <atomic>
#include <memory>

#include <httplib.h>

#include "ztsfc/config.hpp"
#include "ztsfc/http_common.hpp"

namespace ztsfc {

// Test hook: a request carrying this header asks the service to mangle the
// transit proof it returns (`drop-first`, `dup-first`, `flip-first`),
// exercising the verifier without building a hostile function.
inline constexpr const char* kEchoTamperHeader = "X-Echo-Tamper-Pot";

// The protected resource: reflects every request back as JSON so the harness
// can compare what the service received against what the client sent. Trusts
// only enterprise-certified peers (mutual TLS is mandatory).
class EchoService {
 public:
  explicit EchoService(const config::TlsPaths& tls);
  ~EchoService();

  // Binds to addr (port 0 picks one); returns the effective port, -1 on error.
  int bind(const HostPort& addr);
  bool serve();  // blocking
  void stop();
  bool wait_until_ready(int timeout_ms = 5000);

  std::uint64_t invocations() const { return invocations_.load(); }

 private:
  void handle(const httplib::Request& req, httplib::Response& res);

  std::unique_ptr<httplib::SSLServer> server_;
  std::atomic<std::uint64_t> invocations_{0};
};

}  // namespace ztsfc
