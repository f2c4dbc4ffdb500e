#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ztsfc/http_common.hpp"

namespace ztsfc {

using FunctionId = std::string;

// Standard attribute names the PEP derives at ingress. Policies may define
// further attributes; scoring only consults the policy's weight map.
inline constexpr const char* kAttrCert = "cert";
inline constexpr const char* kAttrManaged = "managed";

// Observed facts about one requester, valid for a single request.
struct TrustAttributes {
  std::set<std::string> present;         // attribute names that hold
  std::vector<FunctionId> passed;        // functions already traversed, in order

  bool has_valid_cert() const { return present.count(kAttrCert) > 0; }
  bool is_managed() const { return present.count(kAttrManaged) > 0; }

  static TrustAttributes of(bool valid_cert, bool managed,
                            std::vector<FunctionId> passed_functions = {});
};

struct TrustPolicy {
  std::int64_t threshold = 0;
  std::map<std::string, std::int64_t> attribute_weights;
  std::map<FunctionId, std::int64_t> function_uplift;
  std::map<std::string, FunctionId> compensation;   // missing attribute -> function
  std::vector<FunctionId> function_priority;        // total order, first = earliest hop
  std::map<FunctionId, std::string> function_registry;  // function -> host:port

  // Throws ConfigError naming the violated invariant.
  void validate() const;

  bool knows_function(const FunctionId& fn) const { return function_uplift.count(fn) > 0; }
  // Position in function_priority; smaller runs earlier.
  std::size_t priority_rank(const FunctionId& fn) const;
};

struct TrustScore {
  std::int64_t value = 0;
};

struct PlannedHop {
  FunctionId function;
  std::string address;

  bool operator==(const PlannedHop&) const = default;
};

struct ChainPlan {
  std::vector<PlannedHop> hops;
  std::string terminal;  // service host:port

  std::vector<FunctionId> function_ids() const;
};

struct Decision {
  enum class Kind { Allow, Deny };
  Kind kind = Kind::Deny;
  ChainPlan plan;       // meaningful for Allow
  std::string reason;   // meaningful for Deny; log-only, never sent to clients

  bool allowed() const { return kind == Kind::Allow; }
  static Decision allow(ChainPlan plan);
  static Decision deny(std::string reason);
};

// Weighted sum of present attributes and passed-function uplifts.
// Throws PolicyViolation on unknown or duplicated passed functions.
TrustScore score(const TrustAttributes& attrs, const TrustPolicy& policy);

// The classifier: direct path when the score already meets the threshold,
// otherwise a compensating chain ordered by function priority. `terminal` is
// the protected service address placed at the end of every plan.
Decision select_chain(const TrustAttributes& attrs, const TrustPolicy& policy,
                      const std::string& terminal);

// Returns attrs with `fn` recorded as passed. Throws IdempotencyError when fn
// already passed (a chain loop), PolicyViolation when fn is unknown.
TrustAttributes apply_function_result(const TrustAttributes& attrs, const FunctionId& fn,
                                      const TrustPolicy& policy);

// TLS-level facts extracted from the client connection by the listener.
struct ConnectionInfo {
  bool peer_cert_present = false;
  bool peer_cert_valid = false;       // chains to the client CA and is unexpired
  std::string channel_binding;        // TLS exporter value for this connection
};

class DeviceInventory;

// Ingress attribute derivation. A malformed or unverifiable device assertion
// yields is_managed = false and a diagnostic, never a failure.
TrustAttributes derive_attributes(const ConnectionInfo& conn, const Headers& headers,
                                  const DeviceInventory& inventory,
                                  std::string* diagnostic = nullptr);

inline constexpr const char* kDeviceAssertionHeader = "X-Device-Assertion";

}  // namespace ztsfc
