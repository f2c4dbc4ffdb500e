#include "ztsfc/trust.hpp"

#include <algorithm>
#include <set>

#include "ztsfc/errors.hpp"
#include "ztsfc/inventory.hpp"

namespace ztsfc {

TrustAttributes TrustAttributes::of(bool valid_cert, bool managed,
                                    std::vector<FunctionId> passed_functions) {
  TrustAttributes attrs;
  if (valid_cert) attrs.present.insert(kAttrCert);
  if (managed) attrs.present.insert(kAttrManaged);
  attrs.passed = std::move(passed_functions);
  return attrs;
}

void TrustPolicy::validate() const {
  if (threshold < 0) throw ConfigError("policy invariant violated: threshold must be non-negative");
  for (const auto& [attr, w] : attribute_weights) {
    if (w < 0) {
      throw ConfigError("policy invariant violated: weight of '" + attr + "' must be non-negative");
    }
  }
  for (const auto& [fn, u] : function_uplift) {
    if (u < 0) {
      throw ConfigError("policy invariant violated: uplift of '" + fn + "' must be non-negative");
    }
  }
  for (const auto& [fn, _] : function_uplift) {
    if (function_registry.count(fn) == 0) {
      throw ConfigError("policy invariant violated: function '" + fn + "' has no address");
    }
  }
  std::set<FunctionId> compensators;
  for (const auto& [attr, fn] : compensation) {
    if (function_uplift.count(fn) == 0 || function_registry.count(fn) == 0) {
      throw ConfigError("policy invariant violated: compensation for '" + attr +
                        "' references unknown function '" + fn + "'");
    }
    if (!compensators.insert(fn).second) {
      throw ConfigError("policy invariant violated: compensation map is not 1:1, function '" + fn +
                        "' compensates several attributes");
    }
  }
  std::set<FunctionId> prio(function_priority.begin(), function_priority.end());
  if (prio.size() != function_priority.size()) {
    throw ConfigError("policy invariant violated: priority lists a function twice");
  }
  for (const auto& [fn, _] : function_registry) {
    if (prio.count(fn) == 0) {
      throw ConfigError("policy invariant violated: priority does not order function '" + fn + "'");
    }
  }
  for (const auto& fn : function_priority) {
    if (function_registry.count(fn) == 0) {
      throw ConfigError("policy invariant violated: priority orders unknown function '" + fn + "'");
    }
  }
  std::int64_t attainable = 0;
  for (const auto& [_, w] : attribute_weights) attainable += w;
  for (const auto& [_, u] : function_uplift) attainable += u;
  if (threshold > attainable) {
    throw ConfigError("policy invariant violated: threshold (" + std::to_string(threshold) +
                      ") exceeds the maximum attainable score (" + std::to_string(attainable) +
                      "); no request could ever pass");
  }
}

std::size_t TrustPolicy::priority_rank(const FunctionId& fn) const {
  auto it = std::find(function_priority.begin(), function_priority.end(), fn);
  if (it == function_priority.end()) {
    throw PolicyViolation("function '" + fn + "' has no priority rank");
  }
  return static_cast<std::size_t>(it - function_priority.begin());
}

std::vector<FunctionId> ChainPlan::function_ids() const {
  std::vector<FunctionId> ids;
  ids.reserve(hops.size());
  for (const auto& hop : hops) ids.push_back(hop.function);
  return ids;
}

Decision Decision::allow(ChainPlan plan) { return Decision{Kind::Allow, std::move(plan), {}}; }
Decision Decision::deny(std::string reason) { return Decision{Kind::Deny, {}, std::move(reason)}; }

TrustScore score(const TrustAttributes& attrs, const TrustPolicy& policy) {
  std::int64_t value = 0;
  for (const auto& [attr, weight] : policy.attribute_weights) {
    if (attrs.present.count(attr) > 0) value += weight;
  }
  std::set<FunctionId> seen;
  for (const auto& fn : attrs.passed) {
    auto it = policy.function_uplift.find(fn);
    if (it == policy.function_uplift.end()) {
      throw PolicyViolation("passed function '" + fn + "' is unknown to the policy");
    }
    if (!seen.insert(fn).second) {
      throw PolicyViolation("passed function '" + fn + "' appears twice");
    }
    value += it->second;
  }
  return TrustScore{value};
}

Decision select_chain(const TrustAttributes& attrs, const TrustPolicy& policy,
                      const std::string& terminal) {
  std::int64_t current = score(attrs, policy).value;
  ChainPlan plan;
  plan.terminal = terminal;
  if (current >= policy.threshold) return Decision::allow(std::move(plan));

  // Compensating functions for absent attributes, ordered by priority.
  // Functions already passed contribute to the score and are not re-chained.
  std::vector<FunctionId> candidates;
  for (const auto& [attr, fn] : policy.compensation) {
    if (attrs.present.count(attr) > 0) continue;
    if (std::find(attrs.passed.begin(), attrs.passed.end(), fn) != attrs.passed.end()) continue;
    candidates.push_back(fn);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](const FunctionId& a, const FunctionId& b) {
              return policy.priority_rank(a) < policy.priority_rank(b);
            });

  std::int64_t projected = current;
  for (const auto& fn : candidates) {
    plan.hops.push_back(PlannedHop{fn, policy.function_registry.at(fn)});
    projected += policy.function_uplift.at(fn);
  }
  if (projected >= policy.threshold) return Decision::allow(std::move(plan));
  return Decision::deny("insufficient compensable trust");
}

TrustAttributes apply_function_result(const TrustAttributes& attrs, const FunctionId& fn,
                                      const TrustPolicy& policy) {
  if (!policy.knows_function(fn)) {
    throw PolicyViolation("function '" + fn + "' is unknown to the policy");
  }
  if (std::find(attrs.passed.begin(), attrs.passed.end(), fn) != attrs.passed.end()) {
    throw IdempotencyError("function '" + fn + "' already applied; chain loop");
  }
  TrustAttributes out = attrs;
  out.passed.push_back(fn);
  return out;
}

TrustAttributes derive_attributes(const ConnectionInfo& conn, const Headers& headers,
                                  const DeviceInventory& inventory, std::string* diagnostic) {
  TrustAttributes attrs;
  if (conn.peer_cert_present && conn.peer_cert_valid) attrs.present.insert(kAttrCert);

  auto assertion = get_header(headers, kDeviceAssertionHeader);
  if (!assertion) return attrs;

  auto parsed = parse_device_assertion(*assertion);
  if (!parsed) {
    if (diagnostic) *diagnostic = "malformed device assertion";
    return attrs;
  }
  const auto& [device_id, mac] = *parsed;
  const auto* record = inventory.find(device_id);
  if (!record) {
    if (diagnostic) *diagnostic = "device '" + device_id + "' not in inventory";
    return attrs;
  }
  if (!inventory.verify_assertion(device_id, mac, conn.channel_binding)) {
    if (diagnostic) *diagnostic = "device assertion MAC mismatch for '" + device_id + "'";
    return attrs;
  }
  if (!record->managed) {
    if (diagnostic) *diagnostic = "device '" + device_id + "' is not managed";
    return attrs;
  }
  attrs.present.insert(kAttrManaged);
  return attrs;
}

}  // namespace ztsfc
