#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ztsfc/config.hpp"
#include "ztsfc/harness.hpp"

namespace ztsfc::scenarios {

struct Result {
  std::string name;
  bool pass = false;
  std::string detail;  // failure explanation, or a one-line summary
  std::vector<FunctionId> path;
  int status = 0;
  double latency_ms = 0.0;
  std::map<std::string, std::uint64_t> invocations;  // per-component deltas

  nlohmann::json to_json() const;
  static Result fail(std::string name, std::string why);
};

struct Report {
  std::vector<Result> results;

  std::size_t passed() const;
  std::size_t failed() const;
  bool all_passed() const { return failed() == 0; }
  nlohmann::json to_json() const;
};

// -- individual scenarios -----------------------------------------------------
//
// Each runs against a live deployment, measures invocation deltas around one
// or more requests, and judges the outcome against the expectation the
// fixture policy prescribes.

// One identity posture through the entry point; expects `expected_path` in
// the history record, an echo 200, and zero invocations off the path.
Result routing(harness::Topology& topo, const std::string& name,
               const harness::ClientMaterial& client,
               const std::vector<FunctionId>& expected_path);

Result ips_drop(harness::Topology& topo);
Result mfa_wrong_code(harness::Topology& topo);
Result mfa_challenge(harness::Topology& topo);
Result foreign_certificate(harness::Topology& topo);

// Three tamper modes the service can apply to the transit tokens riding the
// response: drop-first, flip-first, dup-first.
std::vector<Result> pot_tamper(harness::Topology& topo);

// Direct dials from the client identity to each interior component; all must
// die during the TLS handshake with zero HTTP bytes.
std::vector<Result> segmentation(harness::Topology& topo);

// Boots a sealed-chain variant of `base` with probing nodes and checks that
// no node could open an entry addressed to another function.
Result sealed_confidentiality(const config::TopologyConfig& base);

// Median latency advantage of the trusted path over the compensated path,
// measured on a variant of `base` where each function costs ~50 ms. The
// trusted client must skip that cost entirely.
Result latency_advantage(const config::TopologyConfig& base, int samples = 50,
                         double min_margin_ms = 40.0);

// A policy whose threshold no attribute/uplift combination can reach must be
// refused at startup with a diagnostic naming the invariant.
Result startup_rejects_bad_policy(const config::TopologyConfig& base);

// `concurrency` simultaneous green/blue requests, each with a unique body;
// verifies per-request responses, one history record per request, and no
// cross-request bleed.
Result soak(harness::Topology& topo, int concurrency);

// The operator-facing suite: boots the standard deployment from `base` (plus
// a sealed one for the confidentiality check) and runs everything above.
Report run_suite(const config::TopologyConfig& base);

}  // namespace ztsfc::scenarios
