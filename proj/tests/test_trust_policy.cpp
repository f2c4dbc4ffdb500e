#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ztsfc/errors.hpp"
#include "ztsfc/inventory.hpp"
#include "ztsfc/trust.hpp"

using namespace ztsfc;

namespace {

constexpr const char* kTerminal = "127.0.0.1:9000";
constexpr const char* kIpsAddr = "127.0.0.1:9001";
constexpr const char* kMfaAddr = "127.0.0.1:9002";

// Reference enterprise policy used across the suite: two binary attributes,
// one compensating function per attribute, threshold matching full trust.
TrustPolicy reference_policy() {
  TrustPolicy p;
  p.threshold = 2;
  p.attribute_weights = {{"cert", 1}, {"managed", 1}};
  p.function_uplift = {{"ips", 1}, {"mfa", 1}};
  p.compensation = {{"managed", "ips"}, {"cert", "mfa"}};
  p.function_priority = {"mfa", "ips"};
  p.function_registry = {{"ips", kIpsAddr}, {"mfa", kMfaAddr}};
  p.validate();
  return p;
}

std::vector<FunctionId> hop_functions(const Decision& d) {
  return d.plan.function_ids();
}

}  // namespace

TEST_CASE("score sums attribute weights and function uplifts") {
  auto p = reference_policy();
  CHECK(score(TrustAttributes::of(true, true), p).value == 2);
  CHECK(score(TrustAttributes::of(false, false), p).value == 0);
  CHECK(score(TrustAttributes::of(true, false, {"ips"}), p).value == 2);
  CHECK(score(TrustAttributes::of(false, true, {"mfa"}), p).value == 2);
  CHECK(score(TrustAttributes::of(false, false, {"mfa", "ips"}), p).value == 2);
}

TEST_CASE("score ignores attributes the policy assigns no weight") {
  auto p = reference_policy();
  TrustAttributes attrs;
  attrs.present = {"cert", "geofence", "posture-scan"};
  CHECK(score(attrs, p).value == 1);
}

TEST_CASE("score rejects unknown and duplicated passed functions") {
  auto p = reference_policy();
  CHECK_THROWS_AS(score(TrustAttributes::of(true, true, {"waf"}), p), PolicyViolation);
  CHECK_THROWS_AS(score(TrustAttributes::of(true, true, {"ips", "ips"}), p),
                  PolicyViolation);
}

TEST_CASE("select_chain reproduces the four classifier paths") {
  auto p = reference_policy();

  SUBCASE("full trust goes direct") {
    auto d = select_chain(TrustAttributes::of(true, true), p, kTerminal);
    REQUIRE(d.allowed());
    CHECK(d.plan.hops.empty());
    CHECK(d.plan.terminal == kTerminal);
  }
  SUBCASE("unmanaged device is routed through the ips") {
    auto d = select_chain(TrustAttributes::of(true, false), p, kTerminal);
    REQUIRE(d.allowed());
    CHECK(hop_functions(d) == std::vector<FunctionId>{"ips"});
    CHECK(d.plan.hops[0].address == kIpsAddr);
  }
  SUBCASE("missing client certificate requires mfa") {
    auto d = select_chain(TrustAttributes::of(false, true), p, kTerminal);
    REQUIRE(d.allowed());
    CHECK(hop_functions(d) == std::vector<FunctionId>{"mfa"});
    CHECK(d.plan.hops[0].address == kMfaAddr);
  }
  SUBCASE("no trust at all takes mfa then ips, in priority order") {
    auto d = select_chain(TrustAttributes::of(false, false), p, kTerminal);
    REQUIRE(d.allowed());
    CHECK(hop_functions(d) == std::vector<FunctionId>{"mfa", "ips"});
    CHECK(d.plan.terminal == kTerminal);
  }
}

TEST_CASE("select_chain denies when compensation cannot reach the threshold") {
  auto p = reference_policy();
  p.threshold = 4;  // attainable only with every attribute AND every function
  p.validate();

  auto d = select_chain(TrustAttributes::of(false, false), p, kTerminal);
  REQUIRE_FALSE(d.allowed());
  CHECK(d.reason.find("insufficient") != std::string::npos);

  // Both attributes present but still short: nothing is absent, so there is
  // nothing left to compensate.
  auto d2 = select_chain(TrustAttributes::of(true, true), p, kTerminal);
  CHECK_FALSE(d2.allowed());
}

TEST_CASE("select_chain does not re-chain functions that already ran") {
  auto p = reference_policy();
  auto d = select_chain(TrustAttributes::of(false, false, {"mfa"}), p, kTerminal);
  REQUIRE(d.allowed());
  CHECK(hop_functions(d) == std::vector<FunctionId>{"ips"});
}

TEST_CASE("apply_function_result accrues uplift and rejects loops") {
  auto p = reference_policy();

  auto attrs = TrustAttributes::of(true, false);
  CHECK(score(attrs, p).value == 1);
  attrs = apply_function_result(attrs, "ips", p);
  CHECK(attrs.passed == std::vector<FunctionId>{"ips"});
  CHECK(score(attrs, p).value == 2);

  auto chained = apply_function_result(TrustAttributes::of(false, false, {"mfa"}), "ips", p);
  CHECK(chained.passed == std::vector<FunctionId>{"mfa", "ips"});
  CHECK(score(chained, p).value == 2);

  CHECK_THROWS_AS(apply_function_result(attrs, "ips", p), IdempotencyError);
  CHECK_THROWS_AS(apply_function_result(attrs, "waf", p), PolicyViolation);
}

// --- policy invariants -------------------------------------------------------

TEST_CASE("validate rejects unreachable thresholds by name") {
  auto p = reference_policy();
  p.threshold = 5;  // max attainable is 4
  try {
    p.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("threshold") != std::string::npos);
  }
}

TEST_CASE("validate rejects structural policy defects") {
  SUBCASE("negative weight") {
    auto p = reference_policy();
    p.attribute_weights["cert"] = -1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SUBCASE("negative uplift") {
    auto p = reference_policy();
    p.function_uplift["ips"] = -2;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SUBCASE("compensation references unknown function") {
    auto p = reference_policy();
    p.compensation["cert"] = "waf";
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SUBCASE("compensation map not 1:1") {
    auto p = reference_policy();
    p.compensation["cert"] = "ips";  // ips now compensates both attributes
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SUBCASE("function without an address") {
    auto p = reference_policy();
    p.function_registry.erase("ips");
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SUBCASE("priority misses a function") {
    auto p = reference_policy();
    p.function_priority = {"mfa"};
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SUBCASE("priority lists a function twice") {
    auto p = reference_policy();
    p.function_priority = {"mfa", "ips", "mfa"};
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SUBCASE("priority orders unknown function") {
    auto p = reference_policy();
    p.function_priority = {"mfa", "ips", "waf"};
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
}

// --- randomized properties ----------------------------------------------------

namespace {

struct RandomPolicy {
  TrustPolicy policy;
  std::vector<std::string> attributes;  // weighted attribute names
  std::vector<FunctionId> functions;
};

RandomPolicy random_policy(std::mt19937& rng) {
  RandomPolicy r;
  std::uniform_int_distribution<int> count(1, 4), weight(0, 3);
  int nattrs = count(rng), nfns = count(rng);
  for (int i = 0; i < nattrs; ++i) r.attributes.push_back("a" + std::to_string(i));
  for (int i = 0; i < nfns; ++i) r.functions.push_back("f" + std::to_string(i));

  std::int64_t attainable = 0;
  for (const auto& a : r.attributes) {
    r.policy.attribute_weights[a] = weight(rng);
    attainable += r.policy.attribute_weights[a];
  }
  for (const auto& f : r.functions) {
    r.policy.function_uplift[f] = weight(rng);
    r.policy.function_registry[f] = "127.0.0.1:9001";
    attainable += r.policy.function_uplift[f];
  }
  r.policy.function_priority = r.functions;
  std::shuffle(r.policy.function_priority.begin(), r.policy.function_priority.end(), rng);

  // Random injective partial map: some attributes get a compensator.
  auto pool = r.functions;
  std::shuffle(pool.begin(), pool.end(), rng);
  std::size_t next = 0;
  for (const auto& a : r.attributes) {
    if (next < pool.size() && (rng() & 1)) r.policy.compensation[a] = pool[next++];
  }

  std::uniform_int_distribution<std::int64_t> thr(0, attainable);
  r.policy.threshold = thr(rng);
  r.policy.validate();
  return r;
}

TrustAttributes attrs_from_mask(const RandomPolicy& r, unsigned mask) {
  TrustAttributes attrs;
  for (std::size_t i = 0; i < r.attributes.size(); ++i) {
    if (mask & (1u << i)) attrs.present.insert(r.attributes[i]);
  }
  return attrs;
}

}  // namespace

TEST_CASE("every allowed plan is sufficient once its hops report back") {
  std::mt19937 rng(20210915);
  for (int round = 0; round < 400; ++round) {
    auto r = random_policy(rng);
    // Brute force over every subset of weighted attributes.
    for (unsigned mask = 0; mask < (1u << r.attributes.size()); ++mask) {
      auto attrs = attrs_from_mask(r, mask);
      auto d = select_chain(attrs, r.policy, kTerminal);
      if (!d.allowed()) continue;
      // Replay the plan through the accrual path and re-score independently.
      auto replayed = attrs;
      for (const auto& hop : d.plan.hops)
        replayed = apply_function_result(replayed, hop.function, r.policy);
      CHECK(score(replayed, r.policy).value >= r.policy.threshold);
    }
  }
}

TEST_CASE("decisions are deterministic") {
  std::mt19937 rng(424242);
  for (int round = 0; round < 200; ++round) {
    auto r = random_policy(rng);
    auto attrs = attrs_from_mask(r, static_cast<unsigned>(rng()));
    auto a = select_chain(attrs, r.policy, kTerminal);
    auto b = select_chain(attrs, r.policy, kTerminal);
    REQUIRE(a.kind == b.kind);
    CHECK(a.reason == b.reason);
    CHECK(a.plan.hops == b.plan.hops);
    CHECK(a.plan.terminal == b.plan.terminal);
  }
}

TEST_CASE("gaining trust never lowers the score or lengthens the chain") {
  std::mt19937 rng(7777);
  for (int round = 0; round < 400; ++round) {
    auto r = random_policy(rng);
    auto attrs = attrs_from_mask(r, static_cast<unsigned>(rng()));

    // Random valid passed set (unique, known functions).
    auto pool = r.functions;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t npassed = rng() % (pool.size() + 1);
    attrs.passed.assign(pool.begin(), pool.begin() + npassed);

    auto base = select_chain(attrs, r.policy, kTerminal);
    std::int64_t base_score = score(attrs, r.policy).value;

    // Add one absent attribute, if any.
    for (const auto& a : r.attributes) {
      if (attrs.present.count(a)) continue;
      auto more = attrs;
      more.present.insert(a);
      CHECK(score(more, r.policy).value >= base_score);
      auto d = select_chain(more, r.policy, kTerminal);
      if (base.allowed() && d.allowed())
        CHECK(d.plan.hops.size() <= base.plan.hops.size());
      break;
    }
    // Record one more passed function, if any remain.
    if (npassed < pool.size()) {
      auto more = apply_function_result(attrs, pool[npassed], r.policy);
      CHECK(score(more, r.policy).value >= base_score);
      auto d = select_chain(more, r.policy, kTerminal);
      if (base.allowed() && d.allowed())
        CHECK(d.plan.hops.size() <= base.plan.hops.size());
    }
  }
}

TEST_CASE("selected chains are minimal when compensation exactly fills the gap") {
  // Four attributes, four functions, weight == uplift == 1, threshold = 4:
  // every absent attribute costs exactly one hop and no hop is redundant.
  TrustPolicy p;
  p.threshold = 4;
  for (int i = 0; i < 4; ++i) {
    std::string a = "a" + std::to_string(i);
    FunctionId f = "f" + std::to_string(i);
    p.attribute_weights[a] = 1;
    p.function_uplift[f] = 1;
    p.compensation[a] = f;
    p.function_registry[f] = "127.0.0.1:9001";
    p.function_priority.push_back(f);
  }
  p.validate();

  for (unsigned mask = 0; mask < 16; ++mask) {
    TrustAttributes attrs;
    for (int i = 0; i < 4; ++i) {
      if (mask & (1u << i)) attrs.present.insert("a" + std::to_string(i));
    }
    auto d = select_chain(attrs, p, kTerminal);
    REQUIRE(d.allowed());
    std::int64_t base = score(attrs, p).value;

    // Brute force: no proper subset of the selected hops reaches the threshold.
    auto hops = d.plan.function_ids();
    for (unsigned sub = 0; sub + 1 < (1u << hops.size()); ++sub) {
      std::int64_t projected = base;
      for (std::size_t i = 0; i < hops.size(); ++i) {
        if (sub & (1u << i)) projected += p.function_uplift.at(hops[i]);
      }
      CHECK(projected < p.threshold);
    }
  }
}

TEST_CASE("minimality holds for the reference policy too") {
  auto p = reference_policy();
  for (unsigned mask = 0; mask < 4; ++mask) {
    auto attrs = TrustAttributes::of(mask & 1, mask & 2);
    auto d = select_chain(attrs, p, kTerminal);
    REQUIRE(d.allowed());
    std::int64_t base = score(attrs, p).value;
    auto hops = d.plan.function_ids();
    for (unsigned sub = 0; sub + 1 < (1u << hops.size()); ++sub) {
      std::int64_t projected = base;
      for (std::size_t i = 0; i < hops.size(); ++i) {
        if (sub & (1u << i)) projected += p.function_uplift.at(hops[i]);
      }
      CHECK(projected < p.threshold);
    }
  }
}

// --- ingress attribute derivation ---------------------------------------------

namespace {

DeviceInventory test_inventory() {
  DeviceInventory inv;
  inv.add("laptop-007", crypto::Bytes(32, 0x11), true);
  inv.add("byod-042", crypto::Bytes(32, 0x22), false);
  return inv;
}

}  // namespace

TEST_CASE("derive_attributes recognizes a managed device with a valid cert") {
  auto inv = test_inventory();
  ConnectionInfo conn{true, true, "exporter-bytes"};
  Headers headers;
  headers.emplace(kDeviceAssertionHeader,
                  DeviceInventory::make_assertion("laptop-007", crypto::Bytes(32, 0x11),
                                                  conn.channel_binding));
  std::string diag;
  auto attrs = derive_attributes(conn, headers, inv, &diag);
  CHECK(attrs.has_valid_cert());
  CHECK(attrs.is_managed());
  CHECK(attrs.passed.empty());
  CHECK(diag.empty());
}

TEST_CASE("derive_attributes yields nothing without cert or assertion") {
  auto inv = test_inventory();
  ConnectionInfo conn{false, false, "exporter-bytes"};
  auto attrs = derive_attributes(conn, Headers{}, inv);
  CHECK_FALSE(attrs.has_valid_cert());
  CHECK_FALSE(attrs.is_managed());
  CHECK(attrs.passed.empty());
}

TEST_CASE("a presented-but-invalid certificate earns no attribute") {
  auto inv = test_inventory();
  ConnectionInfo conn{true, false, "exporter-bytes"};
  auto attrs = derive_attributes(conn, Headers{}, inv);
  CHECK_FALSE(attrs.has_valid_cert());
}

TEST_CASE("derive_attributes rejects a tampered device assertion") {
  auto inv = test_inventory();
  ConnectionInfo conn{true, true, "exporter-bytes"};
  auto assertion = DeviceInventory::make_assertion("laptop-007", crypto::Bytes(32, 0x11),
                                                   conn.channel_binding);
  // Flip one MAC hex digit.
  char& c = assertion.back();
  c = (c == '0') ? '1' : '0';
  Headers headers;
  headers.emplace(kDeviceAssertionHeader, assertion);

  std::string diag;
  auto attrs = derive_attributes(conn, headers, inv, &diag);
  CHECK(attrs.has_valid_cert());
  CHECK_FALSE(attrs.is_managed());
  CHECK(diag.find("MAC mismatch") != std::string::npos);
}

TEST_CASE("derive_attributes rejects an assertion replayed on another connection") {
  auto inv = test_inventory();
  auto assertion = DeviceInventory::make_assertion("laptop-007", crypto::Bytes(32, 0x11),
                                                   "connection-one");
  Headers headers;
  headers.emplace(kDeviceAssertionHeader, assertion);
  ConnectionInfo other{true, true, "connection-two"};
  auto attrs = derive_attributes(other, headers, inv);
  CHECK_FALSE(attrs.is_managed());
}

TEST_CASE("derive_attributes handles unknown and unmanaged devices") {
  auto inv = test_inventory();
  ConnectionInfo conn{false, false, "cb"};

  Headers unknown;
  unknown.emplace(kDeviceAssertionHeader,
                  DeviceInventory::make_assertion("ghost-1", crypto::Bytes(32, 0x33), "cb"));
  std::string diag;
  CHECK_FALSE(derive_attributes(conn, unknown, inv, &diag).is_managed());
  CHECK(diag.find("not in inventory") != std::string::npos);

  // byod-042 authenticates fine but is flagged unmanaged in the inventory.
  Headers byod;
  byod.emplace(kDeviceAssertionHeader,
               DeviceInventory::make_assertion("byod-042", crypto::Bytes(32, 0x22), "cb"));
  diag.clear();
  CHECK_FALSE(derive_attributes(conn, byod, inv, &diag).is_managed());
  CHECK(diag.find("not managed") != std::string::npos);
}

TEST_CASE("derive_attributes handles malformed assertions") {
  auto inv = test_inventory();
  ConnectionInfo conn{false, false, "cb"};
  for (const char* bad : {"no-colon", "laptop-007:", ":beef", "laptop-007:zzzz"}) {
    Headers headers;
    headers.emplace(kDeviceAssertionHeader, bad);
    std::string diag;
    auto attrs = derive_attributes(conn, headers, inv, &diag);
    CHECK_FALSE(attrs.is_managed());
    CHECK_FALSE(diag.empty());
  }
}
